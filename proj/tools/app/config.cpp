#include "config.hpp"

#include <cmath>
#include <fstream>

namespace extremal::app {

namespace {

using nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

const json& require(const json& obj, const std::string& ptr, const std::string& key) {
    if (!obj.contains(key)) {
        throw ConfigError(child(ptr, key), "required field is missing");
    }
    return obj.at(key);
}

void require_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) {
        throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
    }
}

double get_number(const json& j, const std::string& ptr) {
    if (!j.is_number()) {
        throw ConfigError(ptr, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(ptr, "expected a finite number");
    }
    return v;
}

double get_positive(const json& j, const std::string& ptr) {
    const double v = get_number(j, ptr);
    if (!(v > 0.0)) {
        throw ConfigError(ptr, "expected a positive number");
    }
    return v;
}

int get_int(const json& j, const std::string& ptr, int min_value) {
    if (!j.is_number_integer()) {
        throw ConfigError(ptr, "expected an integer");
    }
    const auto v = j.get<long long>();
    if (v < min_value || v > 1'000'000'000LL) {
        throw ConfigError(ptr, "integer out of range (minimum " + std::to_string(min_value) + ")");
    }
    return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& ptr) {
    if (!j.is_string()) {
        throw ConfigError(ptr, "expected a string");
    }
    return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& ptr, std::optional<Eigen::Index> size = std::nullopt) {
    if (!j.is_array()) {
        throw ConfigError(ptr, "expected an array of numbers");
    }
    if (size && static_cast<Eigen::Index>(j.size()) != *size) {
        throw ConfigError(ptr, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = get_number(j[i], child(ptr, i));
    }
    return v;
}

Matrix get_matrix(const json& j, const std::string& ptr, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw ConfigError(ptr, "expected " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        m.row(r) = get_vector(j[static_cast<std::size_t>(r)], child(ptr, static_cast<std::size_t>(r)), cols)
                       .transpose();
    }
    return m;
}

void check_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError(child(ptr, key), "unknown field");
        }
    }
}

void check_field(const std::string& source, int n, const std::string& ptr) {
    try {
        (void)parse_field(source, n);
    } catch (const ParseError& e) {
        throw ConfigError(ptr, e.what());
    }
}

SystemSpec parse_system(const json& j, const std::string& ptr) {
    require_object(j, ptr);
    check_keys(j, ptr, {"n", "k", "drift", "controlled", "frame_tail", "eps_fd"});
    SystemSpec s;
    s.n = get_int(require(j, ptr, "n"), child(ptr, "n"), 2);
    s.k = get_int(require(j, ptr, "k"), child(ptr, "k"), 1);
    if (s.k >= s.n) {
        throw ConfigError(child(ptr, "k"), "k must be smaller than n");
    }
    s.drift = get_string(require(j, ptr, "drift"), child(ptr, "drift"));
    check_field(s.drift, s.n, child(ptr, "drift"));

    const json& ctl = require(j, ptr, "controlled");
    const std::string ctl_ptr = child(ptr, "controlled");
    if (!ctl.is_array() || static_cast<int>(ctl.size()) != s.k) {
        throw ConfigError(ctl_ptr, "expected an array of k = " + std::to_string(s.k) + " field strings");
    }
    for (std::size_t i = 0; i < ctl.size(); ++i) {
        s.controlled.push_back(get_string(ctl[i], child(ctl_ptr, i)));
        check_field(s.controlled.back(), s.n, child(ctl_ptr, i));
    }
    if (j.contains("frame_tail")) {
        const json& tail = j.at("frame_tail");
        const std::string tail_ptr = child(ptr, "frame_tail");
        if (!tail.is_array() || static_cast<int>(tail.size()) != s.n - s.k) {
            throw ConfigError(tail_ptr, "expected an array of n - k = " + std::to_string(s.n - s.k) + " field strings");
        }
        for (std::size_t i = 0; i < tail.size(); ++i) {
            s.frame_tail.push_back(get_string(tail[i], child(tail_ptr, i)));
            check_field(s.frame_tail.back(), s.n, child(tail_ptr, i));
        }
    }
    if (j.contains("eps_fd")) {
        s.eps_fd = get_positive(j.at("eps_fd"), child(ptr, "eps_fd"));
    }
    return s;
}

void parse_integrator(const json& j, const std::string& ptr, int n, IntegratorConfig& c) {
    require_object(j, ptr);
    check_keys(j, ptr,
               {"eps_switch", "abs_tol", "rel_tol", "max_step", "output_dt", "chart_radius", "chart_center",
                "initial_step", "alpha_floor"});
    auto positive = [&](const char* key, double& field) {
        if (j.contains(key)) {
            field = get_positive(j.at(key), child(ptr, key));
        }
    };
    positive("eps_switch", c.eps_switch);
    positive("abs_tol", c.abs_tol);
    positive("rel_tol", c.rel_tol);
    positive("max_step", c.max_step);
    positive("chart_radius", c.chart_radius);
    positive("initial_step", c.initial_step);
    positive("alpha_floor", c.alpha_floor);
    if (j.contains("output_dt")) {
        c.output_dt = get_number(j.at("output_dt"), child(ptr, "output_dt"));
        if (c.output_dt < 0.0) {
            throw ConfigError(child(ptr, "output_dt"), "expected a nonnegative number");
        }
    }
    if (j.contains("chart_center")) {
        c.chart_center = get_vector(j.at("chart_center"), child(ptr, "chart_center"), n);
    }
}

LiftedPoint parse_start(const json& j, const std::string& ptr, const SystemSpec& sys) {
    require_object(j, ptr);
    check_keys(j, ptr, {"rho", "u", "h_tail", "x"});
    LiftedPoint lp;
    lp.rho = get_positive(require(j, ptr, "rho"), child(ptr, "rho"));
    lp.u = get_vector(require(j, ptr, "u"), child(ptr, "u"), sys.k);
    if (!(lp.u.norm() > 0.0)) {
        throw ConfigError(child(ptr, "u"), "sphere direction must be nonzero");
    }
    lp.u.normalize();
    lp.h_tail = get_vector(require(j, ptr, "h_tail"), child(ptr, "h_tail"), sys.n - sys.k);
    lp.x = get_vector(require(j, ptr, "x"), child(ptr, "x"), sys.n);
    return lp;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    require_object(doc, "");
    check_keys(doc, "", {"system", "anchor", "covector", "brackets", "integrator", "integrate", "sphere", "oracle",
                         "seed"});
    RunConfig c;
    c.system = parse_system(require(doc, "", "system"), "/system");
    const int n = c.system.n;
    const int k = c.system.k;
    c.anchor = get_vector(require(doc, "", "anchor"), "/anchor", n);

    if (doc.contains("covector")) {
        const json& cv = doc.at("covector");
        if (cv.is_string()) {
            if (cv.get<std::string>() != "annihilator") {
                throw ConfigError("/covector", "expected an array of n numbers or \"annihilator\"");
            }
            if (k != n - 1) {
                throw ConfigError("/covector", "the annihilator covector requires k = n - 1");
            }
            c.covector = AnnihilatorChoice{};
        } else {
            Vector xi = get_vector(cv, "/covector", n);
            if (!(xi.norm() > 0.0)) {
                throw ConfigError("/covector", "covector must be nonzero");
            }
            c.covector = xi.normalized();
        }
    } else if (k == n - 1) {
        c.covector = AnnihilatorChoice{};
    } else {
        throw ConfigError("/covector", "required field is missing (annihilator default needs k = n - 1)");
    }

    if (doc.contains("brackets")) {
        const json& b = doc.at("brackets");
        require_object(b, "/brackets");
        check_keys(b, "/brackets", {"H0I", "HIJ"});
        BracketData data;
        data.H0I = get_vector(require(b, "/brackets", "H0I"), "/brackets/H0I", k);
        data.HIJ = get_matrix(require(b, "/brackets", "HIJ"), "/brackets/HIJ", k, k);
        try {
            check_skew_pair(data.H0I, data.HIJ);
        } catch (const Error& e) {
            throw ConfigError("/brackets/HIJ", e.what());
        }
        c.brackets = std::move(data);
    }

    if (doc.contains("integrator")) {
        parse_integrator(doc.at("integrator"), "/integrator", n, c.integrator);
    }

    if (doc.contains("integrate")) {
        const json& j = doc.at("integrate");
        require_object(j, "/integrate");
        check_keys(j, "/integrate", {"t_hat", "t_end", "start"});
        if (j.contains("t_hat")) {
            c.integrate.t_hat = get_number(j.at("t_hat"), "/integrate/t_hat");
        }
        if (j.contains("t_end")) {
            c.integrate.t_end = get_number(j.at("t_end"), "/integrate/t_end");
        }
        if (j.contains("start")) {
            c.integrate.start = parse_start(j.at("start"), "/integrate/start", c.system);
        }
    }

    if (doc.contains("sphere")) {
        const json& j = doc.at("sphere");
        require_object(j, "/sphere");
        check_keys(j, "/sphere", {"u0", "s_end", "output_ds", "random_starts"});
        if (j.contains("u0")) {
            Vector u0 = get_vector(j.at("u0"), "/sphere/u0", k);
            if (!(u0.norm() > 0.0)) {
                throw ConfigError("/sphere/u0", "sphere start must be nonzero");
            }
            c.sphere.u0 = u0.normalized();
        }
        if (j.contains("s_end")) {
            c.sphere.s_end = get_number(j.at("s_end"), "/sphere/s_end");
        }
        if (j.contains("output_ds")) {
            c.sphere.output_ds = get_positive(j.at("output_ds"), "/sphere/output_ds");
        }
        if (j.contains("random_starts")) {
            c.sphere.random_starts = get_int(j.at("random_starts"), "/sphere/random_starts", 1);
        }
    }

    if (doc.contains("oracle")) {
        const json& j = doc.at("oracle");
        require_object(j, "/oracle");
        check_keys(j, "/oracle", {"samples", "max_switches", "linear", "grid"});
        if (j.contains("samples")) {
            c.oracle.samples = get_int(j.at("samples"), "/oracle/samples", 1000);
        }
        if (j.contains("max_switches")) {
            c.oracle.max_switches = get_int(j.at("max_switches"), "/oracle/max_switches", 0);
        }
        if (j.contains("linear")) {
            const json& l = j.at("linear");
            const std::string p = "/oracle/linear";
            require_object(l, p);
            check_keys(l, p, {"A", "B", "x0", "x1"});
            LinearInstance inst;
            const json& x0 = require(l, p, "x0");
            const Eigen::Index dim = x0.is_array() ? static_cast<Eigen::Index>(x0.size()) : 0;
            if (dim < 1 || dim > 3) {
                throw ConfigError(p + "/x0", "expected 1 to 3 entries");
            }
            inst.x0 = get_vector(x0, p + "/x0", dim);
            inst.x1 = get_vector(require(l, p, "x1"), p + "/x1", dim);
            inst.A = get_matrix(require(l, p, "A"), p + "/A", dim, dim);
            const json& B = require(l, p, "B");
            const Eigen::Index kb = (B.is_array() && !B.empty() && B[0].is_array()) ? static_cast<Eigen::Index>(B[0].size()) : 0;
            if (kb < 1 || kb > 2) {
                throw ConfigError(p + "/B", "expected a matrix with 1 or 2 columns");
            }
            inst.B = get_matrix(B, p + "/B", dim, kb);
            c.oracle.linear = std::move(inst);
        }
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            require_object(g, "/oracle/grid");
            check_keys(g, "/oracle/grid", {"dt", "refine", "t_max", "directions", "delta_hit"});
            if (g.contains("dt")) {
                c.oracle.grid.dt = get_positive(g.at("dt"), "/oracle/grid/dt");
            }
            if (g.contains("refine")) {
                c.oracle.grid.refine = get_int(g.at("refine"), "/oracle/grid/refine", 1);
            }
            if (g.contains("t_max")) {
                c.oracle.grid.t_max = get_positive(g.at("t_max"), "/oracle/grid/t_max");
            }
            if (g.contains("directions")) {
                c.oracle.grid.directions = get_int(g.at("directions"), "/oracle/grid/directions", 2);
            }
            if (g.contains("delta_hit")) {
                c.oracle.grid.delta_hit = get_positive(g.at("delta_hit"), "/oracle/grid/delta_hit");
            }
        }
    }

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError("/seed", "expected a nonnegative integer");
        }
        c.seed = s.get<std::uint64_t>();
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

AffineSystem build_system(const RunConfig& config) {
    const SystemSpec& s = config.system;
    VectorField drift = parse_field(s.drift, s.n);
    std::vector<VectorField> controlled;
    for (const auto& src : s.controlled) {
        controlled.push_back(parse_field(src, s.n));
    }
    if (s.frame_tail.empty()) {
        return complete_frame(std::move(drift), std::move(controlled), config.anchor, s.eps_fd);
    }
    std::vector<VectorField> tail;
    for (const auto& src : s.frame_tail) {
        tail.push_back(parse_field(src, s.n));
    }
    AffineSystem system(std::move(drift), std::move(controlled), std::move(tail), s.eps_fd);
    system.check_frame(config.anchor);
    return system;
}

Vector resolve_covector(const RunConfig& config, const AffineSystem& system) {
    if (const Vector* xi = std::get_if<Vector>(&config.covector)) {
        return *xi;
    }
    return annihilator_covector(system, config.anchor);
}

}  // namespace extremal::app
