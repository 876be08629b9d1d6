#include "lrl/serialize.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace lrl {

std::string fmt17(double x) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

namespace {

double num(const ordered_json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) {
        fail(Err::InvalidConfig, std::string("model key '") + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

void check_keys(const ordered_json& j, std::set<std::string> allowed) {
    allowed.insert("schema");
    allowed.insert("model");
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            fail(Err::InvalidConfig, "unknown model key '" + item.key() + "'");
        }
    }
}

CustomCentral make_power(double mu, double a, double n) {
    CustomCentral m;
    m.mu = mu;
    m.u = [a, n](double r) { return a * std::pow(r, n); };
    m.du = [a, n](double r) { return a * n * std::pow(r, n - 1.0); };
    m.d2u = [a, n](double r) { return a * n * (n - 1.0) * std::pow(r, n - 2.0); };
    m.label = "power";
    return m;
}

CustomCentral make_coulomb_inverse_square(double mu, double kappa, double beta) {
    CustomCentral m;
    m.mu = mu;
    m.u = [kappa, beta](double r) { return kappa / r - beta / (r * r); };
    m.du = [kappa, beta](double r) { return -kappa / (r * r) + 2.0 * beta / (r * r * r); };
    m.d2u = [kappa, beta](double r) {
        return 2.0 * kappa / (r * r * r) - 6.0 * beta / (r * r * r * r);
    };
    m.label = "coulomb_inverse_square";
    return m;
}

}  // namespace

CentralModel parse_model(const ordered_json& j) {
    if (!j.is_object()) fail(Err::InvalidConfig, "model file must hold a JSON object");
    if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
        j.at("schema").get<int>() != 1) {
        fail(Err::InvalidConfig, "model file needs \"schema\": 1");
    }
    if (!j.contains("model") || !j.at("model").is_string()) {
        fail(Err::InvalidConfig, "model file needs a \"model\" tag");
    }
    const std::string tag = j.at("model").get<std::string>();

    if (tag == "kepler") {
        check_keys(j, {"mu", "kappa"});
        KeplerCoulomb m;
        m.mu = num(j, "mu", m.mu);
        m.kappa = num(j, "kappa", m.kappa);
        if (!(m.mu > 0.0)) fail(Err::InvalidConfig, "kepler: mu must be positive");
        return m;
    }
    if (tag == "micz") {
        check_keys(j, {"m", "kappa", "alpha"});
        Micz m;
        m.m = num(j, "m", m.m);
        m.kappa = num(j, "kappa", m.kappa);
        m.alpha = num(j, "alpha", m.alpha);
        if (!(m.m > 0.0)) fail(Err::InvalidConfig, "micz: m must be positive");
        return m;
    }
    if (tag == "relcoulomb") {
        check_keys(j, {"m", "kappa"});
        RelCoulomb m;
        m.m = num(j, "m", m.m);
        m.kappa = num(j, "kappa", m.kappa);
        if (!(m.m > 0.0)) fail(Err::InvalidConfig, "relcoulomb: m must be positive");
        return m;
    }
    if (tag == "pn") {
        check_keys(j, {"m1", "m2", "kappa", "c", "alpha", "interaction"});
        const double m1 = num(j, "m1", 1.0);
        const double m2 = num(j, "m2", 1.0);
        const double kappa = num(j, "kappa", -1.0);
        const double c = num(j, "c", 100.0);
        if (!(m1 > 0.0 && m2 > 0.0)) fail(Err::InvalidConfig, "pn: masses must be positive");
        if (!(c > 0.0)) fail(Err::InvalidConfig, "pn: c must be positive");
        if (j.contains("alpha") == j.contains("interaction")) {
            fail(Err::InvalidConfig, "pn: give exactly one of \"alpha\" or \"interaction\"");
        }
        if (j.contains("interaction")) {
            const std::string kind = j.at("interaction").get<std::string>();
            if (kind == "em") return PostNewtonian::electromagnetic(m1, m2, kappa, c);
            if (kind == "gravity") return PostNewtonian::gravitational(m1, m2, kappa, c);
            fail(Err::InvalidConfig, "pn: interaction must be \"em\" or \"gravity\"");
        }
        return PostNewtonian::with_alpha(m1, m2, kappa, num(j, "alpha", 0.0), c);
    }
    if (tag == "power") {
        check_keys(j, {"mu", "a", "n"});
        const double mu = num(j, "mu", 1.0);
        const double a = num(j, "a", 1.0);
        const double n = num(j, "n", 2.0);
        if (!(mu > 0.0)) fail(Err::InvalidConfig, "power: mu must be positive");
        return make_power(mu, a, n);
    }
    if (tag == "coulomb_inverse_square") {
        check_keys(j, {"mu", "kappa", "beta"});
        const double mu = num(j, "mu", 1.0);
        const double kappa = num(j, "kappa", -1.0);
        const double beta = num(j, "beta", 0.0);
        if (!(mu > 0.0)) fail(Err::InvalidConfig, "coulomb_inverse_square: mu must be positive");
        return make_coulomb_inverse_square(mu, kappa, beta);
    }
    fail(Err::InvalidConfig, "unknown model tag '" + tag + "'");
}

CentralModel load_model(const std::string& path) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec))
        fail(Err::InvalidConfig, "model path " + path + " is a directory");
    std::ifstream in(path);
    if (!in) fail(Err::InvalidConfig, "cannot open model file " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Err::InvalidConfig, "model file " + path + ": " + e.what());
    }
    return parse_model(j);
}

ordered_json model_to_json(const CentralModel& model) {
    ordered_json j;
    j["schema"] = 1;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                j["model"] = "kepler";
                j["mu"] = m.mu;
                j["kappa"] = m.kappa;
            } else if constexpr (std::is_same_v<T, Micz>) {
                j["model"] = "micz";
                j["m"] = m.m;
                j["kappa"] = m.kappa;
                j["alpha"] = m.alpha;
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                j["model"] = "relcoulomb";
                j["m"] = m.m;
                j["kappa"] = m.kappa;
            } else if constexpr (std::is_same_v<T, PostNewtonian>) {
                j["model"] = "pn";
                j["m1"] = m.m1;
                j["m2"] = m.m2;
                j["kappa"] = m.kappa;
                j["alpha"] = m.alpha_pn;
                j["c"] = m.c;
            } else {
                j["model"] = "custom";
                j["label"] = m.label;
                j["mu"] = m.mu;
            }
        },
        model);
    return j;
}

PhaseState parse_state_csv(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        const double x = std::strtod(tok.c_str(), &end);
        while (end && *end == ' ') ++end;
        if (end == tok.c_str() || (end && *end != '\0')) {
            fail(Err::InvalidConfig, "state: '" + tok + "' is not a number");
        }
        v.push_back(x);
    }
    if (v.size() != 6) {
        fail(Err::InvalidConfig, "state must be 6 comma-separated numbers x,y,z,px,py,pz");
    }
    return PhaseState{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, 0.0};
}

ordered_json to_json(const Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

ordered_json to_json(const LrlResult& res) {
    ordered_json j;
    j["E"] = res.energy;
    j["l"] = res.ell;
    j["r_m"] = res.r_m;
    j["K"] = res.k_mag;
    j["self_pb_coeff"] = res.self_pb_coeff;
    j["u_o"] = to_json(res.u_o);
    j["K_vec"] = to_json(res.k_vec);
    j["l_vec"] = to_json(res.ell_vec);
    j["circular_degenerate"] = res.circular_degenerate;
    ordered_json peri = ordered_json::array();
    for (const TurningEvent& ev : res.perihelia) {
        ordered_json p;
        p["t"] = ev.t;
        p["r"] = ev.r;
        p["theta"] = ev.theta;
        peri.push_back(p);
    }
    j["perihelia"] = peri;
    return j;
}

ordered_json to_json(const DriftReport& rep) {
    ordered_json j;
    j["label"] = rep.label;
    j["reference"] = rep.reference;
    j["max_abs"] = rep.max_abs;
    j["rms_abs"] = rep.rms_abs;
    j["max_rel"] = rep.max_rel;
    return j;
}

ordered_json to_json(const BracketResidual& res) {
    ordered_json j;
    j["max_abs"] = res.max_abs;
    j["rms"] = res.rms;
    j["scale"] = res.scale;
    j["max_rel"] = res.max_rel();
    j["states_tested"] = res.states_tested;
    return j;
}

ordered_json to_json(const CanonicalPair& pair) {
    ordered_json j;
    j["A"] = to_json(pair.a);
    j["l"] = to_json(pair.ell);
    j["eta"] = pair.eta;
    j["C1"] = pair.c1;
    j["C2"] = pair.c2;
    j["projected_out"] = pair.projected_out;
    return j;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,rx,ry,rz,px,py,pz,r,theta,p_r,E,l\n";
    for (const TrajectorySample& s : traj.samples) {
        out += fmt17(s.t);
        const std::array<double, 11> cols = {s.state.r.x, s.state.r.y, s.state.r.z,
                                             s.state.p.x, s.state.p.y, s.state.p.z,
                                             s.r,         s.theta,     s.p_r,
                                             s.energy,    s.ell.norm()};
        for (const double v : cols) {
            out += ',';
            out += fmt17(v);
        }
        out += '\n';
    }
    if (traj.status != TrajectoryStatus::Ok) {
        out += std::string("# terminated: ") + status_name(traj.status) +
               " t_last=" + fmt17(traj.samples.empty() ? 0.0 : traj.samples.back().t) + "\n";
    }
    return out;
}

std::string w_route_csv(const WRouteSeries& series) {
    std::string out = "t,theta,wx,wy,wz,kx,ky,kz,drift_rel\n";
    const double scale = std::max(series.k_ref.norm(), 1e-300);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out += fmt17(series.t[i]);
        const Vec3& w = series.w[i];
        const Vec3& k = series.k[i];
        const std::array<double, 8> cols = {series.theta[i], w.x, w.y, w.z, k.x, k.y, k.z,
                                            (k - series.k_ref).norm() / scale};
        for (const double v : cols) {
            out += ',';
            out += fmt17(v);
        }
        out += '\n';
    }
    return out;
}

void atomic_write(const std::string& path, const std::string& content) {
    std::error_code ec;
    const auto st = std::filesystem::symlink_status(path, ec);
    if (!ec && std::filesystem::exists(st) && !std::filesystem::is_regular_file(st)) {
        // Renaming over /dev/null, a pipe, or a symlink like /dev/stdout
        // would replace the node itself; stream into such targets instead.
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("short write to " + path);
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move " + tmp + " into place");
    }
}

}  // namespace lrl
