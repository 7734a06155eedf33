#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "experiment.hpp"
#include "shrink/error.hpp"
#include "shrink/measures.hpp"

using shrink::experiment::ExperimentConfig;
using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double to_real(const std::string& s) {
    if (s == "inf") return shrink::kInf;
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    shrink::fail(shrink::ErrorKind::ConfigInvalid, "not a number: " + s);
}

std::vector<double> reals(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split(s)) out.push_back(to_real(item));
    return out;
}

// Overrides applied after the config file; only flags actually given count.
struct Overrides {
    std::string system, x, shape, center, checkpoints, beta, e, f, method, moduli, deltas, u, v, interval;
    std::vector<std::string> rates, t, delta;
    long long steps = 0, precision_bits = 0, horizon = 0;
    uint64_t samples = 0, seed = 0;
    double epsilon = 0, band = 0, lambda = 0, tol = 0, merge_gap = 0;
    int n_max = 0, fit_lo = 0, fit_hi = 0, d = 0, power = 0;
    std::string measure;
    bool degenerate = false, no_stratify = false;
};

struct Common {
    std::string config_path;
    std::string out_dir;
    unsigned jobs = 1;
    bool manifest_only = false;
    bool print_config = false;
};

void add_common(CLI::App* sub, Common& c, Overrides& o) {
    sub->add_option("--config", c.config_path, "JSON config file; flags override its keys");
    sub->add_option("--out", c.out_dir, "output directory (stdout when omitted)");
    sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--manifest-only", c.manifest_only, "validate and emit the manifest without running");
    sub->add_flag("--print-config", c.print_config, "print the effective config and exit");
    sub->add_option("--seed", o.seed, "random seed");
}

void apply(CLI::App* sub, const Overrides& o, ExperimentConfig& cfg) {
    auto given = [&](const char* name) {
        try {
            return sub->get_option(name)->count() > 0;
        } catch (const CLI::OptionNotFound&) {
            return false;
        }
    };
    if (given("--system")) {
        cfg.system.betas.clear();
        cfg.system.matrix.clear();
        if (!o.system.empty() && o.system[0] == '[') {
            try {
                cfg.system.matrix = json::parse(o.system).get<std::vector<std::vector<long long>>>();
            } catch (const json::exception&) {
                shrink::fail(shrink::ErrorKind::ConfigInvalid, "--system: expected [[a,b],[c,d]] or a beta list");
            }
        } else {
            cfg.system.betas = split(o.system);
        }
    }
    if (given("--degenerate")) cfg.system.degenerate = o.degenerate;
    if (given("--x")) cfg.x = split(o.x);
    if (given("--shape")) cfg.target.shape = o.shape;
    if (given("--center")) cfg.target.center = reals(o.center);
    if (given("--rate")) cfg.target.rates = o.rates;
    if (given("--steps")) cfg.steps = o.steps;
    if (given("--checkpoints")) {
        cfg.checkpoints.clear();
        for (double v : reals(o.checkpoints)) cfg.checkpoints.push_back(static_cast<long long>(v));
    }
    if (given("--samples")) cfg.samples = o.samples;
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--epsilon")) cfg.epsilon = o.epsilon;
    if (given("--band")) cfg.band = o.band;
    if (given("--precision-bits")) cfg.precision_bits = o.precision_bits;
    if (given("--measure")) cfg.measure = o.measure;
    if (given("--beta")) cfg.beta = o.beta;
    if (given("--E")) cfg.set_e = reals(o.e);
    if (given("--F")) cfg.set_f = reals(o.f);
    if (given("--n-max")) cfg.n_max = o.n_max;
    if (given("--fit-lo")) cfg.fit_lo = o.fit_lo;
    if (given("--fit-hi")) cfg.fit_hi = o.fit_hi;
    if (given("--no-stratify")) cfg.stratified = !o.no_stratify;
    if (given("--d")) cfg.d = o.d;
    if (given("--delta")) {
        cfg.delta.clear();
        for (const auto& s : o.delta) cfg.delta.push_back(to_real(s));
    }
    if (given("--method")) cfg.method = o.method;
    if (given("--moduli")) cfg.moduli = reals(o.moduli);
    if (given("--lambda")) cfg.lambda = o.lambda;
    if (given("--t")) {
        cfg.t.clear();
        for (const auto& row : o.t) cfg.t.push_back(reals(row));
    }
    if (given("--deltas")) cfg.deltas = reals(o.deltas);
    if (given("--u")) cfg.u = reals(o.u);
    if (given("--v")) cfg.v = reals(o.v);
    if (given("--horizon")) cfg.horizon = o.horizon;
    if (given("--power")) cfg.power = o.power;
    if (given("--tol")) cfg.tol = o.tol;
    if (given("--merge-gap")) cfg.merge_gap = o.merge_gap;
    if (given("--interval")) cfg.interval = reals(o.interval);
}

ExperimentConfig load(const std::string& path, const std::string& command) {
    if (path.empty()) {
        ExperimentConfig c;
        c.command = command;
        return c;
    }
    std::ifstream in(path);
    if (!in) shrink::fail(shrink::ErrorKind::ConfigInvalid, "cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        shrink::fail(shrink::ErrorKind::ConfigInvalid, path + ": " + e.what());
    }
    ExperimentConfig c = shrink::experiment::from_json(j);
    if (c.command.empty()) c.command = command;
    if (c.command != command)
        shrink::fail(shrink::ErrorKind::ConfigInvalid,
                     "command: config is for '" + c.command + "' but the subcommand is '" + command + "'");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shrinking-target experiments on tori"};
    app.require_subcommand(1);
    Common common;
    Overrides o;

    auto* orbit = app.add_subcommand("orbit", "iterate a point; CSV n,coord_index,lo,hi");
    auto* count = app.add_subcommand("count", "hit counts R(x,N) against Phi(N)");
    auto* mixing = app.add_subcommand("mixing", "correlation decay under the invariant measure");
    auto* volume = app.add_subcommand("volume", "target volumes");
    auto* dimension = app.add_subcommand("dimension", "Hausdorff dimension formulas");
    auto* markov = app.add_subcommand("markov", "Markov subsystem of a beta map");
    auto* supp = app.add_subcommand("support", "support of the invariant measure");
    auto* measure = app.add_subcommand("measure", "invariant measure of an interval");

    for (auto* s : {orbit, count, mixing, volume, dimension, markov, supp, measure}) add_common(s, common, o);

    for (auto* s : {orbit, count}) {
        s->add_option("--system", o.system, "betas 'b1,b2,...' or integer matrix '[[2,1],[1,1]]'");
        s->add_option("--x", o.x, "start point 'x1,x2,...'; omitted means random samples");
        s->add_option("--steps", o.steps, "number of steps N");
        s->add_option("--precision-bits", o.precision_bits, "working precision; 0 selects the required budget");
    }
    count->add_flag("--degenerate", o.degenerate, "admit |beta| <= 1 through the degenerate reduction");
    for (auto* s : {count, volume, dimension}) s->add_option("--rate", o.rates, "rate function, e.g. exp:0.5");
    for (auto* s : {count, volume}) {
        s->add_option("--shape", o.shape, "ball, rectangle or hyperboloid");
        s->add_option("--center", o.center, "target center 'c1,c2,...'");
        s->add_option("--checkpoints", o.checkpoints, "comma-separated N values");
    }
    volume->add_option("--steps", o.steps, "emit n = 1..steps");
    count->add_option("--samples", o.samples, "random start points");
    mixing->add_option("--samples", o.samples, "sample count M");
    count->add_option("--epsilon", o.epsilon, "exponent slack in the normalized error");
    count->add_option("--band", o.band, "acceptance band for |R/Phi - 1|");
    count->add_option("--measure", o.measure, "lebesgue or parry");

    for (auto* s : {mixing, markov, supp, measure}) s->add_option("--beta", o.beta, "beta, e.g. g, -g, 2.7, sqrt(2)");
    mixing->add_option("--E", o.e, "interval 'a,b'");
    mixing->add_option("--F", o.f, "interval 'a,b'");
    mixing->add_option("--n-max", o.n_max, "largest lag");
    mixing->add_option("--fit-lo", o.fit_lo, "first lag of the exponential fit");
    mixing->add_option("--fit-hi", o.fit_hi, "last lag of the exponential fit");
    mixing->add_flag("--no-stratify", o.no_stratify, "plain instead of stratified sampling");

    volume->add_option("--d", o.d, "dimension");
    volume->add_option("--delta", o.delta, "hyperboloid or ball parameter")->delimiter(',');

    dimension->add_option("--method", o.method, "ball, rect, onedim, mult, mtp, markov, unbounded or hat");
    dimension->add_option("--moduli", o.moduli, "sorted |beta_i|, 'b1,b2,...'");
    dimension->add_option("--lambda", o.lambda, "lower order of the rate");
    dimension->add_option("--t", o.t, "point of U 't1,...,td' (repeatable, inf allowed)");
    dimension->add_option("--deltas", o.deltas, "exponents for hat and mtp");
    dimension->add_option("--u", o.u, "mtp u vector");
    dimension->add_option("--v", o.v, "mtp v vector");
    dimension->add_option("--horizon", o.horizon, "table horizon for U");

    markov->add_option("--power", o.power, "use the k-th iterate");
    supp->add_option("--tol", o.tol, "density threshold");
    supp->add_option("--merge-gap", o.merge_gap, "close gaps shorter than this");
    measure->add_option("--interval", o.interval, "interval 'a,b'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        ExperimentConfig cfg = load(common.config_path, sub->get_name());
        apply(sub, o, cfg);
        if (common.print_config) {
            std::cout << shrink::experiment::to_json(cfg).dump(2) << '\n';
            return 0;
        }
        shrink::experiment::RunOptions ro;
        ro.jobs = common.jobs;
        ro.manifest_only = common.manifest_only;
        auto res = shrink::experiment::run(cfg, ro);
        for (const auto& d : res.diagnostics)
            if (d.severity == shrink::experiment::Diagnostic::Severity::Warning)
                std::cerr << "warning: " << d.field << ": " << d.message << '\n';
        if (!common.out_dir.empty()) {
            shrink::experiment::write_outputs(res, common.out_dir);
        } else if (common.manifest_only) {
            std::cout << res.manifest.dump(2) << '\n';
        } else {
            bool many = res.outputs.size() > 1;
            for (const auto& [name, content] : res.outputs) {
                if (many) std::cout << "# " << name << '\n';
                std::cout << content;
            }
        }
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const shrink::Error*>(&e);
        std::cerr << "error";
        if (err) std::cerr << " (" << shrink::error_kind_name(err->kind()) << ")";
        std::cerr << ": " << e.what() << '\n';
        return shrink::experiment::exit_code_for(e);
    }
    return 0;
}
