#include "flagbundle/config.hpp"

#include "flagbundle/reporting.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace flagbundle {

using nlohmann::json;

namespace {

struct Collector {
    std::vector<std::string> violations;
    void add(const std::string& path, const std::string& msg) { violations.push_back(path + ": " + msg); }
    bool ok() const { return violations.empty(); }
};

bool get_positive_int(const json& j, const char* key, int& out, const std::string& path,
                      Collector& c) {
    if (!j.contains(key)) return false;
    if (!j[key].is_number_integer() || j[key].get<int>() < 2) {
        c.add(path + "/" + key, "must be an integer >= 2");
        return false;
    }
    out = j[key].get<int>();
    return true;
}

Poly parse_poly(const json& arr, const std::string& path, Collector& c) {
    Poly p;
    if (!arr.is_array() || arr.empty()) {
        c.add(path, "expected a non-empty array of [re, im] pairs");
        return p;
    }
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& e = arr[k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            c.add(path + "/" + std::to_string(k), "expected an [re, im] pair");
            return {};
        }
        p.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return p;
}

void parse_tolerances(const json& j, Tolerances& tol, const std::string& path, Collector& c) {
    auto grab = [&](const char* key, double& slot) {
        if (!j.contains(key)) return;
        if (!j[key].is_number() || !(j[key].get<double>() > 0)) {
            c.add(path + "/" + key, "must be a positive number");
            return;
        }
        slot = j[key].get<double>();
    };
    grab("stencil_h", tol.stencil_h);
    grab("curvature_abs", tol.curvature_abs);
    grab("ratio_rel", tol.ratio_rel);
    grab("psi0_bound", tol.psi0_bound);
    grab("psi0_divergence", tol.psi0_divergence);
    grab("subharmonic_tol", tol.subharmonic_tol);
    grab("witness_tol", tol.witness_tol);
    grab("weakhom_witness_tol", tol.weakhom_witness_tol);
    grab("intertwiner_tol", tol.intertwiner_tol);
}

OperatorConfig parse_json(const json& j, const std::string& base_dir) {
    Collector c;
    OperatorConfig cfg;

    get_positive_int(j, "truncation", cfg.truncation, "", c);

    if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty()) {
        c.add("/blocks", "required non-empty array of weight-sequence specs");
    } else {
        const auto& blocks = j["blocks"];
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const std::string path = "/blocks/" + std::to_string(b);
            const auto& blk = blocks[b];
            if (!blk.is_object() || !blk.contains("type") || !blk["type"].is_string()) {
                c.add(path, "expected an object with a \"type\" field");
                continue;
            }
            std::string type = blk["type"].get<std::string>();
            if (type == "power") {
                if (!blk.contains("lambda") || !blk["lambda"].is_number() ||
                    !(blk["lambda"].get<double>() > 0)) {
                    c.add(path + "/lambda", "power blocks need lambda > 0");
                    continue;
                }
                cfg.blocks.push_back(power_weights(blk["lambda"].get<double>(), cfg.truncation));
            } else if (type == "explicit") {
                if (!blk.contains("weights") || !blk["weights"].is_array()) {
                    c.add(path + "/weights", "explicit blocks need a weights array");
                    continue;
                }
                std::vector<double> w;
                bool good = true;
                for (std::size_t k = 0; k < blk["weights"].size(); ++k) {
                    const auto& e = blk["weights"][k];
                    if (!e.is_number() || !(e.get<double>() > 0)) {
                        c.add(path + "/weights/" + std::to_string(k), "weights must be positive numbers");
                        good = false;
                        break;
                    }
                    w.push_back(e.get<double>());
                }
                if (!good) continue;
                if (static_cast<int>(w.size()) != cfg.truncation) {
                    c.add(path + "/weights", "explicit weight count must equal the truncation");
                    continue;
                }
                cfg.blocks.push_back(WeightSequence::explicit_weights(std::move(w)));
            } else {
                c.add(path + "/type", "unknown block type \"" + type + "\"");
            }
        }
    }

    const int n = static_cast<int>(cfg.blocks.size());
    if (j.contains("couplings")) {
        if (!j["couplings"].is_array()) {
            c.add("/couplings", "expected an array");
        } else {
            const auto& cs = j["couplings"];
            for (std::size_t k = 0; k < cs.size(); ++k) {
                const std::string path = "/couplings/" + std::to_string(k);
                const auto& e = cs[k];
                if (e.is_object() && e.contains("poly")) {
                    Poly p = parse_poly(e["poly"], path + "/poly", c);
                    if (!p.empty()) cfg.couplings.push_back(CouplingSpec::poly(std::move(p)));
                } else if (e.is_object() && e.contains("matrix") && e["matrix"].is_string()) {
                    std::filesystem::path mp = e["matrix"].get<std::string>();
                    if (mp.is_relative()) mp = std::filesystem::path(base_dir) / mp;
                    try {
                        cfg.couplings.push_back(CouplingSpec::explicit_matrix(
                            read_matrix_csv(mp.string(), cfg.truncation, cfg.truncation)));
                    } catch (const Error& err) {
                        c.add(path + "/matrix", err.what());
                    }
                } else {
                    c.add(path, "expected {\"poly\": ...} or {\"matrix\": \"path.csv\"}");
                }
            }
        }
    }
    if (n >= 1 && static_cast<int>(cfg.couplings.size()) != n - 1)
        c.add("/couplings", "expected exactly " + std::to_string(n - 1) + " couplings for " +
                                std::to_string(n) + " blocks, got " +
                                std::to_string(cfg.couplings.size()));

    if (j.contains("conditionA")) {
        if (!j["conditionA"].is_object()) {
            c.add("/conditionA", "expected an object keyed by \"i,j\" pairs");
        } else {
            for (const auto& [key, val] : j["conditionA"].items()) {
                const std::string path = "/conditionA/" + key;
                int i = 0, jj = 0;
                char comma = 0;
                std::istringstream is(key);
                if (!(is >> i >> comma >> jj) || comma != ',') {
                    c.add(path, "keys must look like \"1,3\" (1-based block indices)");
                    continue;
                }
                if (i < 1 || jj > n || jj - i < 2) {
                    c.add(path, "indices must satisfy 1 <= i, j <= n and j - i >= 2");
                    continue;
                }
                Poly p = parse_poly(val, path, c);
                if (poly_degree(p) < 0) {
                    c.add(path, "polynomial must be non-zero");
                    continue;
                }
                cfg.condA[{i - 1, jj - 1}] = std::move(p);
            }
        }
    }

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_object()) {
            c.add("/grid", "expected an object");
        } else {
            if (g.contains("radii")) {
                if (!g["radii"].is_array() || g["radii"].empty()) {
                    c.add("/grid/radii", "expected a non-empty array");
                } else {
                    cfg.grid.radii.clear();
                    for (std::size_t k = 0; k < g["radii"].size(); ++k) {
                        const auto& e = g["radii"][k];
                        if (!e.is_number() || e.get<double>() < 0 || e.get<double>() >= 1) {
                            c.add("/grid/radii/" + std::to_string(k), "radii must lie in [0, 1)");
                            break;
                        }
                        cfg.grid.radii.push_back(e.get<double>());
                    }
                }
            }
            if (g.contains("angles")) {
                if (!g["angles"].is_number_integer() || g["angles"].get<int>() < 1)
                    c.add("/grid/angles", "must be a positive integer");
                else
                    cfg.grid.angles = g["angles"].get<int>();
            }
        }
    }

    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object())
            c.add("/tolerances", "expected an object");
        else
            parse_tolerances(j["tolerances"], cfg.tol, "/tolerances", c);
    }

    if (!c.ok()) throw SchemaError(std::move(c.violations));
    return cfg;
}

}  // namespace

OperatorConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError({path + ": cannot open config file"});
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError({path + ": invalid JSON (" + e.what() + ")"});
    }
    return parse_json(j, std::filesystem::path(path).parent_path().string());
}

OperatorConfig parse_config_text(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError({std::string("invalid JSON (") + e.what() + ")"});
    }
    return parse_json(j, base_dir);
}

FlagOperator build_operator(const OperatorConfig& cfg) {
    std::vector<KernelSpace> spaces;
    spaces.reserve(cfg.blocks.size());
    for (const auto& w : cfg.blocks) spaces.emplace_back(w);
    return assemble_flag(spaces, cfg.couplings, cfg.condA);
}

Mat read_matrix_csv(const std::string& path, int rows, int cols) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open matrix CSV " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("row,col,re,im", 0) != 0)
        throw Error("matrix CSV " + path + " must start with header row,col,re,im");
    Mat m = Mat::Zero(rows, cols);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        long r = 0, c = 0;
        double re = 0, im = 0;
        char s1 = 0, s2 = 0, s3 = 0;
        if (!(is >> r >> s1 >> c >> s2 >> re >> s3 >> im) || s1 != ',' || s2 != ',' || s3 != ',')
            throw Error("matrix CSV " + path + ": malformed line " + std::to_string(lineno));
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw Error("matrix CSV " + path + ": index out of range on line " +
                        std::to_string(lineno));
        m(r, c) = Complex(re, im);
    }
    return m;
}

void write_matrix_csv(const std::string& path, const Mat& m) {
    write_atomic(path, matrix_csv(m));
}

}  // namespace flagbundle
