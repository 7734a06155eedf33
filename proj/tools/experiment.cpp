#include "experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "shrink/counting.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/dimension.hpp"
#include "shrink/eigen.hpp"
#include "shrink/error.hpp"
#include "shrink/markov.hpp"
#include "shrink/measures.hpp"
#include "shrink/orbit.hpp"
#include "shrink/targets.hpp"

#ifndef SHRINK_GIT_DESCRIBE
#define SHRINK_GIT_DESCRIBE "unknown"
#endif

namespace shrink::experiment {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"orbit",     "count",  "mixing",  "volume",
                                         "dimension", "markov", "support", "measure"};
const std::set<std::string> kMethods = {"ball", "rect", "onedim", "mult", "mtp", "markov", "unbounded", "hat"};

// JSON has no infinities; they travel as the strings "inf" and "-inf".
json real_to_json(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json reals_to_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(real_to_json(x));
    return out;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    fail(ErrorKind::ConfigInvalid, path + ": " + what);
}

double real_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    bad(path, "expected a number or \"inf\"");
}

// Reads the keys of one object and rejects any it does not recognise.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) bad(path_.empty() ? "config" : path_, "expected an object");
    }

    std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    void get(const char* key, T& out) {
        if (const json* v = find(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception&) {
                bad(at(key), "wrong type");
            }
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            T value{};
            try {
                value = v->get<T>();
            } catch (const json::exception&) {
                bad(at(key), "wrong type");
            }
            out = value;
        }
    }

    void get_real(const char* key, double& out) {
        if (const json* v = find(key)) out = real_from_json(*v, at(key));
    }

    void get_real(const char* key, std::optional<double>& out) {
        if (const json* v = find(key)) {
            if (v->is_null())
                out.reset();
            else
                out = real_from_json(*v, at(key));
        }
    }

    void get_reals(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) out = reals(*v, at(key));
    }

    void get_real_rows(const char* key, std::vector<std::vector<double>>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) bad(at(key), "expected an array of arrays");
            out.clear();
            for (size_t i = 0; i < v->size(); ++i)
                out.push_back(reals((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) bad(at(it.key().c_str()), "unknown key");
    }

private:
    static std::vector<double> reals(const json& v, const std::string& path) {
        if (!v.is_array()) bad(path, "expected an array");
        std::vector<double> out;
        for (size_t i = 0; i < v.size(); ++i)
            out.push_back(real_from_json(v[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string iso_time(std::chrono::system_clock::time_point t) {
    std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool needs_system(const std::string& command) { return command == "orbit" || command == "count"; }

// Falls back to the system betas when no explicit spectrum is given.
std::vector<double> moduli_of(const ExperimentConfig& c) {
    std::vector<double> m = c.moduli;
    if (m.empty()) {
        if (!c.system.matrix.empty()) {
            m = eigenvalue_moduli(c.system.matrix).moduli;
        } else {
            for (const auto& b : c.system.betas) m.push_back(std::fabs(RealConstant::parse(b).value()));
        }
    }
    if (m.empty() && !c.beta.empty()) m.push_back(std::fabs(RealConstant::parse(c.beta).value()));
    std::sort(m.begin(), m.end());
    return m;
}

std::vector<RateFunction> rates_of(const ExperimentConfig& c) {
    std::vector<RateFunction> out;
    for (const auto& r : c.target.rates) out.push_back(RateFunction::parse(r));
    return out;
}

TorusSystem system_of(const ExperimentConfig& c) {
    if (!c.system.matrix.empty()) return IntegerMatrixSystem::make(c.system.matrix);
    std::vector<RealConstant> betas;
    for (const auto& b : c.system.betas) betas.push_back(RealConstant::parse(b));
    return c.system.degenerate ? DiagonalTorusSystem::make_degenerate(betas) : DiagonalTorusSystem::make(betas);
}

size_t system_dim(const ExperimentConfig& c) {
    return c.system.matrix.empty() ? c.system.betas.size() : c.system.matrix.size();
}

TargetSpec target_of(const ExperimentConfig& c, size_t d) {
    auto rates = rates_of(c);
    if (rates.empty()) fail(ErrorKind::ConfigInvalid, "target.rates: at least one rate is required");
    std::vector<double> center = c.target.center;
    if (center.empty()) center.assign(d, 0.0);
    if (c.target.shape == "ball") return TargetSpec::ball(center, rates[0]);
    if (c.target.shape == "hyperboloid") return TargetSpec::hyperboloid(center, rates[0]);
    if (c.target.shape == "rectangle") {
        if (rates.size() == 1) rates.assign(center.size(), rates[0]);
        return TargetSpec::rectangle(center, rates);
    }
    fail(ErrorKind::ConfigInvalid, "target.shape: expected ball, rectangle or hyperboloid");
}

std::vector<long long> checkpoints_of(const ExperimentConfig& c) {
    std::vector<long long> cp = c.checkpoints;
    if (cp.empty()) cp.push_back(c.steps);
    std::sort(cp.begin(), cp.end());
    cp.erase(std::unique(cp.begin(), cp.end()), cp.end());
    return cp;
}

bool degenerate_in_use(const ExperimentConfig& c) {
    if (!c.system.degenerate || !c.system.matrix.empty()) return false;
    for (const auto& b : c.system.betas)
        if (std::fabs(RealConstant::parse(b).value()) <= 1.0) return true;
    return false;
}

AccumulationSet u_of(const ExperimentConfig& c) {
    if (!c.t.empty()) {
        AccumulationSet u;
        u.points = c.t;
        return u;
    }
    return accumulation_set(rates_of(c), c.horizon);
}

double lambda_of(const ExperimentConfig& c) {
    if (c.lambda) return *c.lambda;
    auto rates = rates_of(c);
    if (rates.empty()) fail(ErrorKind::ConfigInvalid, "lambda: give lambda or target.rates");
    return lower_order(rates[0]).value;
}

json partition_json(const Partition& p) { return {{"k1", p.k1}, {"k2", p.k2}, {"k3", p.k3}}; }

json report_json(const DimensionReport& r) {
    json parts = json::array();
    for (const auto& p : r.partition) parts.push_back(partition_json(p));
    return {{"value", r.value},      {"argmin", r.argmin},           {"t", reals_to_json(r.t)},
            {"partition", parts},    {"method", r.method},           {"error_bound", r.error_bound},
            {"conjectural", r.conjectural}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Diagnostics -------------------------------------------------------------

struct Collector {
    std::vector<Diagnostic> out;
    void config(std::string field, std::string msg) {
        out.push_back({Diagnostic::Severity::ConfigError, std::move(field), std::move(msg)});
    }
    void pre(std::string field, std::string msg) {
        out.push_back({Diagnostic::Severity::PreconditionError, std::move(field), std::move(msg)});
    }
    void warn(std::string field, std::string msg) {
        out.push_back({Diagnostic::Severity::Warning, std::move(field), std::move(msg)});
    }
};

bool parse_ok(Collector& col, const std::string& field, const std::string& text, RealConstant* out = nullptr) {
    try {
        RealConstant r = RealConstant::parse(text);
        if (out) *out = r;
        return true;
    } catch (const std::exception& e) {
        col.config(field, e.what());
        return false;
    }
}

void check_system(const ExperimentConfig& c, Collector& col) {
    const auto& s = c.system;
    if (s.betas.empty() == s.matrix.empty()) {
        col.config("system", "give exactly one of system.betas and system.matrix");
        return;
    }
    if (!s.matrix.empty()) {
        size_t d = s.matrix.size();
        for (size_t i = 0; i < d; ++i)
            if (s.matrix[i].size() != d) {
                col.config("system.matrix[" + std::to_string(i) + "]", "matrix must be square");
                return;
            }
        try {
            IntegerMatrixSystem m = IntegerMatrixSystem::make(s.matrix);
            if (c.command == "count") {
                auto em = eigenvalue_moduli(m);
                for (size_t i = 0; i < em.moduli.size(); ++i)
                    if (em.moduli[i] - em.error_bound[i] <= 1.0)
                        col.pre("system.matrix",
                                "counting needs every eigenvalue modulus > 1; found " + fmt(em.moduli[i]));
            }
        } catch (const std::exception& e) {
            col.pre("system.matrix", e.what());
        }
        return;
    }
    for (size_t i = 0; i < s.betas.size(); ++i) {
        std::string field = "system.betas[" + std::to_string(i) + "]";
        RealConstant b;
        if (!parse_ok(col, field, s.betas[i], &b)) continue;
        if (std::fabs(b.value()) <= 1.0 && !s.degenerate)
            col.pre(field, "|beta| <= 1 is handled only by the degenerate reduction; set system.degenerate");
    }
}

void check_rates(const ExperimentConfig& c, Collector& col, size_t d) {
    if (c.target.rates.empty()) {
        col.config("target.rates", "at least one rate is required");
        return;
    }
    for (size_t i = 0; i < c.target.rates.size(); ++i) {
        std::string field = "target.rates[" + std::to_string(i) + "]";
        RateFunction r;
        try {
            r = RateFunction::parse(c.target.rates[i]);
        } catch (const std::exception& e) {
            col.config(field, e.what());
            continue;
        }
        if (d == 0) continue;
        // Phi uses the closed form only below 2^-d; larger radii use the capped volume.
        double cap = std::ldexp(1.0, -static_cast<int>(d));
        long long last = std::min<long long>(std::max<long long>(c.steps, 1), 1000);
        for (long long n = 1; n <= last; ++n) {
            double v;
            try {
                v = psi(r, n);
            } catch (const std::exception&) {
                break;
            }
            if (v >= cap) {
                col.warn(field, "psi(" + std::to_string(n) + ") >= 2^-" + std::to_string(d) +
                                    "; volumes are capped at 1 for such n");
                break;
            }
        }
    }
    const std::string& sh = c.target.shape;
    if (sh != "ball" && sh != "rectangle" && sh != "hyperboloid")
        col.config("target.shape", "expected ball, rectangle or hyperboloid");
    if (sh == "rectangle" && c.target.rates.size() != 1 && d != 0 && c.target.rates.size() != d)
        col.config("target.rates", "rectangles take one rate or one per coordinate");
    if (!c.target.center.empty() && d != 0 && c.target.center.size() != d)
        col.config("target.center", "center has " + std::to_string(c.target.center.size()) +
                                        " coordinates; the system has " + std::to_string(d));
    for (size_t i = 0; i < c.target.center.size(); ++i)
        if (!(c.target.center[i] >= 0.0 && c.target.center[i] < 1.0))
            col.config("target.center[" + std::to_string(i) + "]", "center coordinates lie in [0,1)");
}

void check_interval(Collector& col, const std::string& field, const std::vector<double>& v) {
    if (v.size() != 2 || !(0.0 <= v[0] && v[0] < v[1] && v[1] <= 1.0))
        col.config(field, "expected [a, b] with 0 <= a < b <= 1");
}

void check_beta(const ExperimentConfig& c, Collector& col, double min_modulus, const std::string& why) {
    if (c.beta.empty()) {
        col.config("beta", "beta is required");
        return;
    }
    RealConstant b;
    if (!parse_ok(col, "beta", c.beta, &b)) return;
    double m = std::fabs(b.value());
    if (c.command == "markov") m = std::pow(m, c.power);
    if (m <= min_modulus) col.pre("beta", why);
}

void check_dimension(const ExperimentConfig& c, Collector& col) {
    if (!kMethods.count(c.method)) {
        col.config("method", "expected one of ball, rect, onedim, mult, mtp, markov, unbounded, hat");
        return;
    }
    if (c.method == "mtp") {
        size_t d = c.deltas.size();
        if (d == 0 || c.u.size() != d || c.v.size() != d) {
            col.config("deltas", "mtp needs deltas, u and v of equal length");
            return;
        }
        for (size_t k = 0; k < d; ++k)
            if (!(c.u[k] < c.v[k])) col.pre("u[" + std::to_string(k) + "]", "mtp needs u_k < v_k");
        return;
    }
    std::vector<double> m;
    try {
        m = moduli_of(c);
    } catch (const std::exception& e) {
        col.config("moduli", e.what());
        return;
    }
    if (m.empty()) {
        col.config("moduli", "give moduli or a system");
        return;
    }
    for (size_t k = 0; k < m.size(); ++k)
        if (!(m[k] > 1.0)) col.pre("moduli[" + std::to_string(k) + "]", "every modulus must exceed 1");
    if (c.method == "markov" && m.front() <= 8.0)
        col.pre("moduli", "the Markov subsystem bound needs a slope modulus > 8");
    bool scalar = c.method == "ball" || c.method == "onedim" || c.method == "mult" || c.method == "markov";
    if (scalar) {
        if (!c.lambda && c.target.rates.empty()) col.config("lambda", "give lambda or target.rates");
        if (c.target.rates.size() > 0) check_rates(c, col, 0);
        return;
    }
    if (c.t.empty()) {
        if (c.target.rates.empty()) {
            col.config("t", "give t or target.rates");
            return;
        }
        check_rates(c, col, 0);
    }
    for (size_t r = 0; r < c.t.size(); ++r)
        if (c.t[r].size() != m.size()) col.config("t[" + std::to_string(r) + "]", "one entry per modulus");
    if (c.method == "hat" && c.deltas.size() != m.size()) col.config("deltas", "one delta per modulus");
    if (c.method == "rect" || c.method == "hat") {
        try {
            if (!u_of(c).bounded())
                col.pre(c.t.empty() ? "target.rates" : "t",
                        "U is unbounded; the exact formula does not apply, use method unbounded");
        } catch (const std::exception&) {
        }
    }
}

}  // namespace

// Serialization -----------------------------------------------------------

json to_json(const ExperimentConfig& c) {
    json sys = {{"betas", c.system.betas}, {"matrix", c.system.matrix}, {"degenerate", c.system.degenerate}};
    json tgt = {{"shape", c.target.shape}, {"center", reals_to_json(c.target.center)}, {"rates", c.target.rates}};
    json t = json::array();
    for (const auto& row : c.t) t.push_back(reals_to_json(row));
    json j = {{"command", c.command},
              {"system", sys},
              {"target", tgt},
              {"x", c.x},
              {"steps", c.steps},
              {"checkpoints", c.checkpoints},
              {"samples", c.samples},
              {"seed", c.seed ? json(*c.seed) : json(nullptr)},
              {"epsilon", c.epsilon},
              {"band", c.band},
              {"precision_bits", c.precision_bits},
              {"precision_cap", c.precision_cap ? json(*c.precision_cap) : json(nullptr)},
              {"measure", c.measure},
              {"beta", c.beta},
              {"set_e", reals_to_json(c.set_e)},
              {"set_f", reals_to_json(c.set_f)},
              {"n_max", c.n_max},
              {"fit_lo", c.fit_lo},
              {"fit_hi", c.fit_hi},
              {"stratified", c.stratified},
              {"d", c.d},
              {"delta", reals_to_json(c.delta)},
              {"method", c.method},
              {"moduli", reals_to_json(c.moduli)},
              {"lambda", c.lambda ? real_to_json(*c.lambda) : json(nullptr)},
              {"t", t},
              {"deltas", reals_to_json(c.deltas)},
              {"u", reals_to_json(c.u)},
              {"v", reals_to_json(c.v)},
              {"horizon", c.horizon},
              {"power", c.power},
              {"tol", c.tol},
              {"merge_gap", c.merge_gap},
              {"interval", reals_to_json(c.interval)}};
    return j;
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    ObjectReader r(j, "");
    r.get("command", c.command);
    if (const json* s = r.find("system")) {
        ObjectReader rs(*s, "system");
        rs.get("betas", c.system.betas);
        rs.get("matrix", c.system.matrix);
        rs.get("degenerate", c.system.degenerate);
        rs.finish();
    }
    if (const json* t = r.find("target")) {
        ObjectReader rt(*t, "target");
        rt.get("shape", c.target.shape);
        rt.get_reals("center", c.target.center);
        rt.get("rates", c.target.rates);
        rt.finish();
    }
    r.get("x", c.x);
    r.get("steps", c.steps);
    r.get("checkpoints", c.checkpoints);
    r.get("samples", c.samples);
    r.get("seed", c.seed);
    r.get_real("epsilon", c.epsilon);
    r.get_real("band", c.band);
    r.get("precision_bits", c.precision_bits);
    r.get("precision_cap", c.precision_cap);
    r.get("measure", c.measure);
    r.get("beta", c.beta);
    r.get_reals("set_e", c.set_e);
    r.get_reals("set_f", c.set_f);
    r.get("n_max", c.n_max);
    r.get("fit_lo", c.fit_lo);
    r.get("fit_hi", c.fit_hi);
    r.get("stratified", c.stratified);
    r.get("d", c.d);
    r.get_reals("delta", c.delta);
    r.get("method", c.method);
    r.get_reals("moduli", c.moduli);
    r.get_real("lambda", c.lambda);
    r.get_real_rows("t", c.t);
    r.get_reals("deltas", c.deltas);
    r.get_reals("u", c.u);
    r.get_reals("v", c.v);
    r.get("horizon", c.horizon);
    r.get("power", c.power);
    r.get_real("tol", c.tol);
    r.get_real("merge_gap", c.merge_gap);
    r.get_reals("interval", c.interval);
    r.finish();
    return c;
}

bool is_stochastic(const std::string& command) { return command == "count" || command == "mixing"; }

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
    Collector col;
    if (!kCommands.count(c.command)) {
        col.config("command", "expected one of orbit, count, mixing, volume, dimension, markov, support, measure");
        return col.out;
    }
    bool fixed_point = c.command == "count" && (!c.x.empty() || c.system.degenerate);
    if (is_stochastic(c.command) && !c.seed && !fixed_point)
        col.config("seed", "a seed is required for " + c.command);
    if (c.precision_cap && *c.precision_cap < 64) col.config("precision_cap", "must be at least 64 bits");
    if (c.precision_bits < 0) col.config("precision_bits", "must be >= 0");

    if (needs_system(c.command)) {
        check_system(c, col);
        size_t d = system_dim(c);
        if (c.steps < 0) col.config("steps", "must be >= 0");
        for (size_t i = 0; i < c.x.size(); ++i) parse_ok(col, "x[" + std::to_string(i) + "]", c.x[i]);
        if (!c.x.empty() && c.x.size() != d)
            col.config("x", "start point has " + std::to_string(c.x.size()) + " coordinates; the system has " +
                                std::to_string(d));
        if (c.command == "orbit" && c.x.empty()) col.config("x", "orbit needs a start point");
        if (c.command == "count") {
            check_rates(c, col, d);
            for (long long n : c.checkpoints)
                if (n < 0) col.config("checkpoints", "checkpoints must be >= 0");
            bool reduction = false;
            try {
                reduction = degenerate_in_use(c);
            } catch (const std::exception&) {
            }
            if (c.checkpoints.empty() && c.steps <= 0 && !reduction)
                col.config("steps", "give steps or checkpoints");
            if (c.samples == 0) col.config("samples", "must be >= 1");
            if (!(c.epsilon > 0.0)) col.config("epsilon", "must be > 0");
            if (c.measure != "lebesgue" && c.measure != "parry")
                col.config("measure", "expected lebesgue or parry");
            if (c.measure == "parry" && !c.system.matrix.empty())
                col.pre("measure", "the invariant product measure is available for diagonal systems only");
        }
    } else if (c.command == "mixing") {
        check_beta(c, col, 1.0, "mixing needs |beta| > 1");
        check_interval(col, "set_e", c.set_e);
        check_interval(col, "set_f", c.set_f);
        if (c.samples == 0) col.config("samples", "must be >= 1");
        if (!(0 <= c.fit_lo && c.fit_lo < c.fit_hi && c.fit_hi <= c.n_max))
            col.config("fit_lo", "need 0 <= fit_lo < fit_hi <= n_max");
    } else if (c.command == "volume") {
        if (c.d < 1) col.config("d", "must be >= 1");
        if (c.delta.empty() && c.target.rates.empty()) col.config("delta", "give delta or target.rates");
        bool hyp = c.target.shape == "hyperboloid";
        for (size_t i = 0; i < c.delta.size(); ++i) {
            if (hyp && !(c.delta[i] > 0.0)) col.config("delta[" + std::to_string(i) + "]", "must be > 0");
            if (!hyp && !(c.delta[i] >= 0.0)) col.config("delta[" + std::to_string(i) + "]", "must be >= 0");
        }
        if (!c.target.rates.empty()) {
            check_rates(c, col, static_cast<size_t>(std::max(c.d, 1)));
            if (c.steps < 1 && c.checkpoints.empty()) col.config("steps", "give steps or checkpoints");
        }
    } else if (c.command == "dimension") {
        check_dimension(c, col);
    } else if (c.command == "markov") {
        if (c.power < 1) col.config("power", "must be >= 1");
        check_beta(c, col, 8.0, "the Markov construction needs a slope modulus > 8");
    } else if (c.command == "support") {
        check_beta(c, col, 1.0, "support needs |beta| > 1");
        if (!(c.tol > 0.0)) col.config("tol", "must be > 0");
        if (!(c.merge_gap >= 0.0)) col.config("merge_gap", "must be >= 0");
    } else if (c.command == "measure") {
        check_beta(c, col, 1.0, "the invariant measure needs |beta| > 1");
        check_interval(col, "interval", c.interval);
    }
    return col.out;
}

// Hashing -----------------------------------------------------------------

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string config_hash(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("seed");
    return sha256_hex(j.dump());
}

const char* tool_version() { return "0.1.0"; }
const char* git_describe() { return SHRINK_GIT_DESCRIBE; }

int exit_code_for(const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    if (!err) return 1;
    switch (err->kind()) {
        case ErrorKind::ConfigInvalid: return 2;
        case ErrorKind::PrecisionExhausted:
        case ErrorKind::BudgetTooLarge:
        case ErrorKind::AmbiguityBudget: return 4;
        case ErrorKind::TolUnreachable:
        case ErrorKind::Indeterminate: return 5;
        default: return 3;
    }
}

// Commands ----------------------------------------------------------------

namespace {

using Outputs = std::map<std::string, std::string>;

void run_orbit(const ExperimentConfig& c, Outputs& out) {
    TorusSystem sys = system_of(c);
    std::ostringstream csv;
    csv << "n,coord_index,lo,hi\n";
    auto row = [&](long long n, size_t i, double lo, double hi) {
        csv << n << ',' << i << ',' << fmt(lo) << ',' << fmt(hi) << '\n';
    };
    std::vector<RealConstant> x;
    bool rational = true;
    for (const auto& s : c.x) {
        x.push_back(RealConstant::parse(s));
        rational = rational && x.back().is_rational();
    }
    long long bits = c.precision_bits > 0 ? c.precision_bits : required_precision(sys, std::max(c.steps, 1LL));
    if (bits > precision_cap())
        fail(ErrorKind::BudgetTooLarge, "precision " + std::to_string(bits) + " exceeds the cap");
    auto prec = static_cast<mpfr_prec_t>(bits);

    if (auto* m = std::get_if<IntegerMatrixSystem>(&sys); m && rational) {
        std::vector<mpq_class> q;
        for (const auto& r : x) q.push_back(frac(r.rational_value()));
        RationalOrbit orb(*m, q);
        for (long long n = 0;; ++n) {
            for (size_t i = 0; i < q.size(); ++i) {
                double v = orb.state()[i].get_d();
                row(n, i, v, v);
            }
            if (n == c.steps) break;
            orb.step();
        }
    } else if (m) {
        std::vector<UnitRealInterval> u;
        for (const auto& r : x) u.push_back(UnitRealInterval::from_constant(r, prec));
        MatrixOrbit orb(*m, u);
        for (long long n = 0;; ++n) {
            for (size_t i = 0; i < u.size(); ++i) {
                auto a = orb.arc(i);
                row(n, i, a.lo, a.hi);
            }
            if (n == c.steps) break;
            orb.step();
        }
    } else {
        const auto& d = std::get<DiagonalTorusSystem>(sys);
        std::vector<UnitRealInterval> u;
        for (const auto& r : x) u.push_back(UnitRealInterval::from_constant(r, prec));
        DiagonalOrbit orb(d, u);
        for (long long n = 0;; ++n) {
            for (size_t i = 0; i < u.size(); ++i) {
                auto a = orb.hull_arc(i);
                row(n, i, a.lo, a.hi);
            }
            if (n == c.steps) break;
            orb.step();
        }
    }
    out["orbit.csv"] = csv.str();
}

void run_reduction(const ExperimentConfig& c, Outputs& out) {
    std::vector<double> betas;
    for (const auto& b : c.system.betas) betas.push_back(RealConstant::parse(b).value());
    auto rates = rates_of(c);
    std::vector<double> center = c.target.center;
    if (center.empty()) center.assign(betas.size(), 0.0);
    ReductionOutcome r = degenerate_reduction(betas, rates.at(0), center);
    json j = {{"kind", reduction_kind_name(r.kind)},
              {"coordinate", r.coordinate},
              {"tau", real_to_json(r.tau)},
              {"points", r.points},
              {"lo", r.lo},
              {"hi", r.hi},
              {"reduced_betas", r.reduced_betas},
              {"reduced_center", r.reduced_center},
              {"squared_system", r.squared_system},
              {"description", r.describe()}};
    out["reduction.json"] = dump(j);
}

void run_count(const ExperimentConfig& c, const RunOptions& ro, Outputs& out) {
    if (degenerate_in_use(c)) {
        run_reduction(c, out);
        return;
    }
    TorusSystem sys = system_of(c);
    TargetSpec target = target_of(c, system_dim(c));
    std::vector<long long> cps = checkpoints_of(c);
    uint64_t seed = c.seed.value_or(0);

    std::unique_ptr<ProductMeasure> mu;
    if (c.measure == "parry") {
        std::vector<ParryYrrapMeasure> f;
        for (const auto& b : c.system.betas) f.emplace_back(RealConstant::parse(b));
        mu = std::make_unique<ProductMeasure>(std::move(f));
    }
    CountOptions opt;
    opt.epsilon = c.epsilon;
    opt.precision_bits = c.precision_bits;
    opt.phi.measure = mu.get();
    opt.phi.seed = splitmix64(seed);

    std::vector<CountingResult> results;
    std::vector<double> phi;
    double fraction = 0.0;
    double max_abs_e = 0.0;
    if (!c.x.empty()) {
        std::vector<RealConstant> x;
        bool rational = true;
        for (const auto& s : c.x) {
            x.push_back(RealConstant::parse(s));
            rational = rational && x.back().is_rational();
        }
        StartPoint p = ConstantPoint{x};
        if (rational) {
            ExactPoint e;
            for (const auto& r : x) e.x.push_back(frac(r.rational_value()));
            p = e;
        }
        results.push_back(count_hits(sys, target, p, cps, opt));
        for (const auto& cp : results[0].checkpoints) phi.push_back(cp.phi);
        const auto& last = results[0].checkpoints.back();
        double mid = 0.5 * (last.r_lo + last.r_hi);
        fraction = last.phi > 0 && std::fabs(mid / last.phi - 1.0) <= c.band ? 1.0 : 0.0;
        for (const auto& cp : results[0].checkpoints)
            if (!std::isnan(cp.e)) max_abs_e = std::max(max_abs_e, std::fabs(cp.e));
    } else {
        MonteCarloSummary s = monte_carlo_counting(sys, target, c.samples, cps, seed, ro.jobs, opt, c.band);
        results = std::move(s.samples);
        phi = s.phi;
        fraction = s.fraction_in_band;
        max_abs_e = s.max_abs_e;
    }

    std::ostringstream csv;
    csv << "sample_id,N,R_lo,R_hi,Phi,e\n";
    long long ambiguous = 0;
    json engines = json::array();
    for (const auto& r : results) {
        ambiguous += r.ambiguous_hits;
        for (const auto& cp : r.checkpoints)
            csv << r.sample_id << ',' << cp.n << ',' << cp.r_lo << ',' << cp.r_hi << ',' << fmt(cp.phi) << ','
                << fmt(cp.e) << '\n';
    }
    std::string engine = results.empty() ? "" : results[0].engine;
    json summary = {{"samples", results.size()},
                    {"checkpoints", cps},
                    {"phi", phi},
                    {"band", c.band},
                    {"fraction_in_band", fraction},
                    {"max_abs_e", max_abs_e},
                    {"ambiguous_hits", ambiguous},
                    {"engine", engine},
                    {"target", shape_name(target.shape)}};
    out["count.csv"] = csv.str();
    out["count_summary.json"] = dump(summary);
}

void run_mixing(const ExperimentConfig& c, const RunOptions& ro, Outputs& out) {
    ParryYrrapMeasure mu(RealConstant::parse(c.beta));
    CorrelationOptions opt;
    opt.stratified = c.stratified;
    opt.jobs = ro.jobs;
    CorrelationSeries s = correlation_series(mu, {c.set_e[0], c.set_e[1]}, {c.set_f[0], c.set_f[1]}, c.n_max,
                                             c.samples, *c.seed, c.fit_lo, c.fit_hi, opt);
    std::ostringstream csv;
    csv << "n,phi_hat,stderr\n";
    std::vector<int> exact;
    for (const auto& p : s.phi_hat) {
        csv << p.n << ',' << fmt(p.estimate) << ',' << fmt(p.std_error) << '\n';
        if (p.exact) exact.push_back(p.n);
    }
    json fit = {{"beta", c.beta},
                {"C", s.fit.c},
                {"gamma", s.fit.gamma},
                {"r2", s.fit.r2},
                {"converged", s.fit.converged},
                {"fit_range", {c.fit_lo, c.fit_hi}},
                {"kappa_hat", s.kappa_hat},
                {"exact_lags", exact},
                {"samples", c.samples}};
    out["mixing.csv"] = csv.str();
    out["mixing_fit.json"] = dump(fit);
}

void run_volume(const ExperimentConfig& c, Outputs& out) {
    std::ostringstream csv;
    if (!c.delta.empty()) {
        csv << "delta,volume\n";
        for (double delta : c.delta) {
            double v;
            if (c.target.shape == "hyperboloid")
                v = hyperboloid_volume(c.d, delta);
            else
                v = std::pow(std::min(1.0, 2.0 * delta), c.d);
            csv << fmt(delta) << ',' << fmt(v) << '\n';
        }
    } else {
        TargetSpec target = target_of(c, static_cast<size_t>(c.d));
        csv << "n,volume\n";
        if (c.checkpoints.empty()) {
            for (long long n = 1; n <= c.steps; ++n) csv << n << ',' << fmt(lebesgue_volume(target, n)) << '\n';
        } else {
            for (long long n : checkpoints_of(c)) csv << n << ',' << fmt(lebesgue_volume(target, n)) << '\n';
        }
    }
    out["volume.csv"] = csv.str();
}

void run_dimension(const ExperimentConfig& c, Outputs& out) {
    json j;
    const std::string& m = c.method;
    if (m == "mtp") {
        MtpInput in{c.deltas, c.u, c.v};
        std::vector<double> s;
        for (size_t i = 0; i < in.deltas.size(); ++i) s.push_back(mtp_s(in, i));
        j = {{"method", m}, {"value", mtp_dimension(in)}, {"s", s}};
    } else {
        std::vector<double> mod = moduli_of(c);
        if (m == "ball") {
            j = report_json(dim_ball(mod, lambda_of(c)));
        } else if (m == "onedim") {
            j = {{"method", m}, {"value", dim_onedim(mod.at(0), lambda_of(c))}};
        } else if (m == "mult") {
            j = {{"method", m}, {"value", dim_mult(mod, lambda_of(c))}};
        } else if (m == "markov") {
            MarkovBounds b = markov_bounds(mod.at(0), lambda_of(c));
            j = {{"method", m}, {"value", b.dim_lambda_lb}, {"dim_lambda_lb", b.dim_lambda_lb}, {"dim_lb", b.dim_lb}};
        } else if (m == "rect") {
            j = report_json(dim_rect(mod, u_of(c)));
        } else if (m == "hat") {
            j = report_json(dim_hat(mod, u_of(c), c.deltas));
        } else {
            DimensionBounds b = unbounded_bounds(mod, u_of(c));
            j = {{"method", m},
                 {"lower", b.lower},
                 {"upper", b.upper},
                 {"t_lower", reals_to_json(b.t_lower)},
                 {"t_upper", reals_to_json(b.t_upper)}};
        }
        j["moduli"] = mod;
    }
    out["dimension.json"] = dump(j);
}

void run_markov(const ExperimentConfig& c, Outputs& out) {
    RealConstant beta = RealConstant::parse(c.beta);
    PiecewiseLinearMap map = c.power == 1 ? beta_map(beta) : power_map(beta, c.power);
    MarkovSubsystem sub = build_markov(map);
    auto violation = check_markov_conditions(sub);
    Primitivity prim = is_primitive(sub.a);
    EntropyEstimate ent = entropy_and_dim(sub.a, sub.partition.slope_modulus);
    json pieces = json::array();
    for (const auto& p : sub.pieces) pieces.push_back({p.first, p.second});
    json rows = json::array();
    for (const auto& r : sub.a) {
        std::vector<size_t> cols;
        for (size_t k = 0; k < r.size(); ++k)
            if (r[k]) cols.push_back(k);
        rows.push_back(cols);
    }
    const auto& cert = sub.certificates;
    json j = {{"beta", c.beta},
              {"power", c.power},
              {"slope_modulus", sub.partition.slope_modulus},
              {"kappa", sub.kappa},
              {"partition", sub.partition.breakpoints},
              {"pieces", pieces},
              {"A", rows},
              {"certificates",
               {{"row_min", cert.row_min},
                {"row_bound", cert.row_bound},
                {"entropy_lb", cert.entropy_lb},
                {"dim_lb", cert.dim_lb}}},
              {"conditions_hold", !violation.has_value()},
              {"violation", violation ? json(*violation) : json(nullptr)},
              {"primitive", prim.primitive},
              {"primitive_power", prim.power},
              {"entropy", {{"h_top", ent.h_top}, {"h_lower", ent.h_lower}, {"h_upper", ent.h_upper}}},
              {"dimension", ent.dim}};
    out["markov.json"] = dump(j);
}

void run_support(const ExperimentConfig& c, Outputs& out) {
    SupportSet s = support(RealConstant::parse(c.beta), c.tol, c.merge_gap);
    json iv = json::array();
    for (const auto& p : s.intervals) iv.push_back({p.first, p.second});
    json j = {{"beta", c.beta},
              {"intervals", iv},
              {"total_length", s.total_length()},
              {"tol", c.tol},
              {"merge_gap", c.merge_gap}};
    out["support.json"] = dump(j);
}

void run_measure(const ExperimentConfig& c, Outputs& out) {
    ParryYrrapMeasure mu(RealConstant::parse(c.beta));
    json j = {{"beta", c.beta},
              {"interval", c.interval},
              {"value", mu.measure_interval(c.interval[0], c.interval[1])},
              {"tol", mu.tail_bound()},
              {"normalizer", mu.normalizer()},
              {"truncation_order", mu.truncation_order()}};
    out["measure.json"] = dump(j);
}

std::vector<std::string> planned_outputs(const ExperimentConfig& c) {
    const std::string& k = c.command;
    if (k == "orbit") return {"orbit.csv"};
    if (k == "count") return degenerate_in_use(c) ? std::vector<std::string>{"reduction.json"}
                                                  : std::vector<std::string>{"count.csv", "count_summary.json"};
    if (k == "mixing") return {"mixing.csv", "mixing_fit.json"};
    if (k == "volume") return {"volume.csv"};
    return {k + ".json"};
}

json tolerances() {
    return {{"membership_margin_ulps", 4},
            {"full_cylinder_slack", std::ldexp(1.0, -40)},
            {"markov_slack", kMarkovSlack},
            {"measure_truncation", 1e-12},
            {"support_tol", 1e-9},
            {"support_merge_gap", 1e-6},
            {"ambiguity_budget", CountOptions{}.ambiguity_budget},
            {"precision_cap_bits", precision_cap()}};
}

std::string diagnostic_text(const Diagnostic& d) { return d.field + ": " + d.message; }

}  // namespace

RunResult run(const ExperimentConfig& c, const RunOptions& opt) {
    RunResult res;
    res.diagnostics = validate(c);
    for (const auto& d : res.diagnostics) {
        if (d.severity == Diagnostic::Severity::ConfigError) fail(ErrorKind::ConfigInvalid, diagnostic_text(d));
    }
    for (const auto& d : res.diagnostics) {
        if (d.severity == Diagnostic::Severity::PreconditionError) fail(ErrorKind::Precondition, diagnostic_text(d));
    }
    if (c.precision_cap) set_precision_cap(c.precision_cap);

    auto start = std::chrono::system_clock::now();
    auto t0 = std::chrono::steady_clock::now();
    if (!opt.manifest_only) {
        try {
            if (c.command == "orbit") run_orbit(c, res.outputs);
            else if (c.command == "count") run_count(c, opt, res.outputs);
            else if (c.command == "mixing") run_mixing(c, opt, res.outputs);
            else if (c.command == "volume") run_volume(c, res.outputs);
            else if (c.command == "dimension") run_dimension(c, res.outputs);
            else if (c.command == "markov") run_markov(c, res.outputs);
            else if (c.command == "support") run_support(c, res.outputs);
            else run_measure(c, res.outputs);
        } catch (const PrecisionExhausted& e) {
            throw PrecisionExhausted(e.step(), c.command + " run: " + e.what());
        } catch (const Error& e) {
            throw Error(e.kind(), c.command + " run: " + e.what());
        }
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto end = std::chrono::system_clock::now();

    json warnings = json::array();
    for (const auto& d : res.diagnostics)
        if (d.severity == Diagnostic::Severity::Warning) warnings.push_back(diagnostic_text(d));
    json files = json::object();
    for (const auto& [name, content] : res.outputs)
        files[name] = {{"sha256", sha256_hex(content)}, {"bytes", content.size()}};
    res.manifest = {{"command", c.command},
                    {"config_hash", config_hash(c)},
                    {"seed", c.seed ? json(*c.seed) : json(nullptr)},
                    {"tool_version", tool_version()},
                    {"git_describe", git_describe()},
                    {"start_time", iso_time(start)},
                    {"end_time", iso_time(end)},
                    {"wall_time", wall},
                    {"jobs", opt.jobs},
                    {"dry_run", opt.manifest_only},
                    {"tolerances", tolerances()},
                    {"warnings", warnings},
                    {"outputs", files},
                    {"config", to_json(c)}};
    if (opt.manifest_only) res.manifest["planned_outputs"] = planned_outputs(c);
    return res;
}

void write_outputs(const RunResult& r, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [name, content] : r.outputs) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        f << content;
        if (!f) fail(ErrorKind::InvalidInput, "cannot write " + (fs::path(dir) / name).string());
    }
    std::ofstream m(fs::path(dir) / "manifest.json", std::ios::binary);
    m << r.manifest.dump(2) << '\n';
    if (!m) fail(ErrorKind::InvalidInput, "cannot write manifest in " + dir);
}

}  // namespace shrink::experiment
