#include "vsm/manifold_io.hpp"

#include "vsm/errors.hpp"
#include "vsm/hash.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace vsm {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "array files are little-endian float64");

namespace {

std::string coeff_file(int n, std::size_t p) {
    return "coeff_n" + std::to_string(n) + "_u" + std::to_string(p) + ".bin";
}

std::string pack_triple(const TripleY& y) {
    const auto& t = y.theta.values();
    const auto& s = y.psi.values();
    const auto& l = y.lambda.values();
    std::string out(sizeof(double) * static_cast<std::size_t>(t.size() + s.size() + l.size()), '\0');
    char* at = out.data();
    for (const auto* a : {t.data(), s.data()}) {
        std::memcpy(at, a, sizeof(double) * static_cast<std::size_t>(t.size()));
        at += sizeof(double) * static_cast<std::size_t>(t.size());
    }
    std::memcpy(at, l.data(), sizeof(double) * static_cast<std::size_t>(l.size()));
    return out;
}

TripleY unpack_triple(const std::string& bytes, const GridPtr& grid, const std::string& name) {
    const auto nxi = static_cast<Eigen::Index>(grid->xi().size());
    const auto nx = static_cast<Eigen::Index>(grid->x().size());
    const std::size_t want = sizeof(double) * static_cast<std::size_t>(2 * nxi * nx + nxi);
    if (bytes.size() != want) throw DomainError("array file " + name + " has the wrong size");
    Array2D t(nxi, nx), s(nxi, nx);
    ArrayX l(nxi);
    const char* at = bytes.data();
    std::memcpy(t.data(), at, sizeof(double) * static_cast<std::size_t>(t.size()));
    at += sizeof(double) * static_cast<std::size_t>(t.size());
    std::memcpy(s.data(), at, sizeof(double) * static_cast<std::size_t>(s.size()));
    at += sizeof(double) * static_cast<std::size_t>(s.size());
    std::memcpy(l.data(), at, sizeof(double) * static_cast<std::size_t>(l.size()));
    return TripleY{GridFn2D(grid, std::move(t)), GridFn2D(grid, std::move(s)), GridFn1D(xi_axis(grid), std::move(l))};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DomainError("cannot read " + p.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DomainError("cannot write " + p.string());
}

json forcing_json(const ForcingSpec& f) {
    return json{{"family", f.family}, {"amplitude", f.amplitude}, {"center", f.center}, {"width", f.width},
                {"ratio", f.ratio},   {"max_order", f.max_order}, {"csv_path", f.csv_path}};
}

ForcingSpec forcing_from_json(const json& j) {
    ForcingSpec f;
    f.family = j.at("family").get<std::string>();
    f.amplitude = j.at("amplitude").get<double>();
    f.center = j.at("center").get<double>();
    f.width = j.at("width").get<double>();
    f.ratio = j.at("ratio").get<double>();
    f.max_order = j.at("max_order").get<int>();
    f.csv_path = j.at("csv_path").get<std::string>();
    return f;
}

}  // namespace

void save_model(const ManifoldModel& model, const fs::path& dir, const json& provenance) {
    fs::create_directories(dir);
    const Grid1D& xi = model.grid->xi();
    const Grid1D& x = model.grid->x();
    json m;
    m["format"] = "vsm-manifold";
    m["version"] = 1;
    m["grid"] = {{"xi_min", xi.min()}, {"xi_max", xi.max()}, {"xi_n", xi.size()},
                 {"x_min", x.min()},   {"x_max", x.max()},   {"x_n", x.size()}};
    json u = json::array();
    for (std::size_t p = 0; p < model.stencil.size(); ++p) u.push_back(model.stencil[p]);
    m["stencil"] = {{"u_max", model.stencil.u_max()}, {"nodes", model.stencil.size()}, {"u", u}};
    m["alpha"] = model.alpha;
    m["orthogonality_weighted"] = model.orthogonality_weighted;
    m["Xi"] = model.Xi;
    m["order"] = model.order;
    m["validated_eps_max"] = model.validated_eps_max;
    m["eps_diagnosed"] = model.eps_diagnosed;
    m["forcing"] = forcing_json(model.forcing.spec());
    m["warnings"] = model.warnings;
    m["provenance"] = provenance;
    json files = json::array();
    for (std::size_t p = 0; p < model.series.size(); ++p) {
        for (int n = 0; n <= model.order; ++n) {
            const std::string name = coeff_file(n, p);
            const std::string bytes = pack_triple(model.coeff(p, n));
            write_bytes(dir / name, bytes);
            files.push_back({{"node", p}, {"order", n}, {"path", name}, {"sha256", sha256_hex(bytes)}});
        }
    }
    m["files"] = files;
    write_bytes(dir / kManifestName, m.dump(2) + "\n");
}

json read_manifest(const fs::path& dir) {
    try {
        return json::parse(read_bytes(dir / kManifestName));
    } catch (const json::exception& e) {
        throw DomainError("malformed manifest in " + dir.string() + ": " + e.what());
    }
}

ManifoldModel load_model(const fs::path& dir) {
    const json m = read_manifest(dir);
    try {
        if (m.at("format") != "vsm-manifold" || m.at("version") != 1)
            throw DomainError("unsupported manifest format in " + dir.string());
        const json& g = m.at("grid");
        ManifoldModel model;
        model.grid = make_grid(g.at("xi_min").get<double>(), g.at("xi_max").get<double>(),
                               g.at("xi_n").get<std::size_t>(), g.at("x_min").get<double>(),
                               g.at("x_max").get<double>(), g.at("x_n").get<std::size_t>());
        const json& st = m.at("stencil");
        model.stencil = UStencil(st.at("u_max").get<double>(), st.at("nodes").get<std::size_t>());
        for (std::size_t p = 0; p < model.stencil.size(); ++p)
            if (model.stencil[p] != st.at("u").at(p).get<double>())
                throw DomainError("stored u-nodes do not match the stencil");
        model.alpha = m.at("alpha").get<int>();
        model.orthogonality_weighted = m.at("orthogonality_weighted").get<bool>();
        model.Xi = m.at("Xi").get<double>();
        model.chi = build_cutoff(model.Xi, xi_axis(model.grid));
        model.forcing = ForcingFamily(forcing_from_json(m.at("forcing")));
        model.order = m.at("order").get<int>();
        model.validated_eps_max = m.at("validated_eps_max").get<double>();
        model.eps_diagnosed = m.at("eps_diagnosed").get<bool>();
        model.warnings = m.at("warnings").get<std::vector<std::string>>();

        const std::size_t nodes = model.stencil.size();
        std::vector<std::vector<TripleY>> c(nodes, std::vector<TripleY>(static_cast<std::size_t>(model.order) + 1));
        std::vector<std::vector<bool>> seen(nodes, std::vector<bool>(static_cast<std::size_t>(model.order) + 1));
        for (const json& f : m.at("files")) {
            const auto p = f.at("node").get<std::size_t>();
            const auto n = f.at("order").get<int>();
            if (p >= nodes || n < 0 || n > model.order) throw DomainError("manifest lists an unknown array");
            const std::string name = f.at("path").get<std::string>();
            const std::string bytes = read_bytes(dir / name);
            if (sha256_hex(bytes) != f.at("sha256").get<std::string>())
                throw DomainError("digest mismatch for " + name);
            c[p][static_cast<std::size_t>(n)] = unpack_triple(bytes, model.grid, name);
            seen[p][static_cast<std::size_t>(n)] = true;
        }
        for (std::size_t p = 0; p < nodes; ++p) {
            for (bool s : seen[p])
                if (!s) throw DomainError("manifest is missing a coefficient array");
            model.series.emplace_back(std::move(c[p]));
        }
        return model;
    } catch (const json::exception& e) {
        throw DomainError("malformed manifest in " + dir.string() + ": " + e.what());
    }
}

std::string manifest_hash(const fs::path& dir) { return sha256_file(dir / kManifestName); }

}  // namespace vsm
