// gdiv: experiment runner. Every subcommand writes one or more CSV reports
// into --out and returns 0 on success, 2 on bad input, 3 when --check is set
// and a gate fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdiv/gdiv.hpp"

using namespace gdiv;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPrecondition = 2;
constexpr int kExitCheck = 3;

struct Common {
    i64 nmax{0};
    double delta{1.0 / 20.0};
    std::uint64_t seed{42};
    unsigned threads{0};
    std::string out{"."};
    bool check{false};
    bool timestamp{false};
    std::string config;
    i64 kappa_n{1'000'000};
    std::string kappa_file;
};

struct Params {
    std::vector<i64> n;
    double p{1.5};
    double rho{2.0};
    int R{4};
    double gamma{0.5};
    std::string q{"1"};
    double omega_lo{0.0};
    double omega_hi{std::numbers::pi};
    int trials{0};
    int kmax{12};
    i64 box{64};
    int T{64};
    int k{3};
    std::vector<i64> Q{4, 8, 16, 32};
    std::vector<i64> boxes;
    std::string kind{"divisor"};
    i64 points{400};
    double r_exp{1.2};
    double s_exp{1.2};
    bool no_cutoff{false};
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--nmax", c.nmax, "Divisor table size (default: smallest that fits the run)");
    sub->add_option("--delta", c.delta, "Major-arc exponent, 0 < delta <= 1/20");
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--threads", c.threads, "Worker threads (0 = hardware)");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_flag("--check", c.check, "Exit 3 when the acceptance gate fails");
    sub->add_flag("--timestamp", c.timestamp, "Add a timestamp to the metadata line");
    sub->add_option("--config", c.config, "File of key=value lines; flags override it");
    sub->add_option("--kappa-n", c.kappa_n, "Cutoff for the kappa estimate");
    sub->add_option("--kappa-file", c.kappa_file, "Read kappa from this file instead");
}

// key=value lines; blank lines and '#' comments ignored. Keys are flag names
// without the leading dashes. Only options not given on the command line
// are filled.
void apply_config(CLI::App* sub, const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        require(eq != std::string::npos, path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        require(opt != nullptr, path + ":" + std::to_string(lineno) + ": unknown key " + key);
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            if (value == "true" || value == "1") opt->add_result(std::string("true"));
        } else {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) opt->add_result(trim(item));
        }
        opt->run_callback();
    }
}

double load_kappa(const Common& c)
{
    if (!c.kappa_file.empty()) {
        std::ifstream in(c.kappa_file);
        double k = 0.0;
        require(static_cast<bool>(in >> k), "cannot read kappa from " + c.kappa_file);
        return k;
    }
    return sierpinski_kappa(c.kappa_n);
}

DivisorTable make_table(const Common& c, i64 needed)
{
    require(needed >= 1, "nothing to compute");
    const i64 n = c.nmax > 0 ? c.nmax : needed;
    require(n >= needed, "--nmax " + std::to_string(n) + " is too small; this run needs " + std::to_string(needed));
    require(n <= kMaxSieveNorm, "--nmax exceeds the sieve cap " + std::to_string(kMaxSieveNorm));
    return divisor_sieve(n);
}

void write_report(const Common& c, const std::string& name, const ExperimentReport& rep)
{
    fs::create_directories(c.out);
    const fs::path path = fs::path(c.out) / (name + ".csv");
    std::ofstream os(path);
    require(os.good(), "cannot write " + path.string());
    rep.write_csv(os, c.timestamp);
    std::cout << "wrote " << path.string() << " (" << rep.rows.size() << " rows)\n";
}

ExperimentReport base_report(const std::string& name, const Common& c, double kappa)
{
    ExperimentReport rep;
    rep.experiment = name;
    rep.seed = c.seed;
    rep.kappa = kappa;
    return rep;
}

std::string join(const std::vector<i64>& v)
{
    std::string s;
    for (i64 x : v) s += (s.empty() ? "" : ";") + std::to_string(x);
    return s;
}

GaussInt parse_gauss(const std::string& text)
{
    // Accepts "a", "a+bi", "a-bi", "bi".
    std::string s;
    for (char ch : text)
        if (ch != ' ') s += ch;
    require(!s.empty(), "empty Gaussian integer");
    if (s.back() != 'i') return {std::stoll(s), 0};
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] == '+' || s[i] == '-') split = i;
    auto coef = [](const std::string& t) -> i64 {
        if (t.empty() || t == "+") return 1;
        if (t == "-") return -1;
        return std::stoll(t);
    };
    if (split == std::string::npos) return {0, coef(s)};
    return {std::stoll(s.substr(0, split)), coef(s.substr(split))};
}

struct Gate {
    bool ok{true};
    std::string message;
};

int finish(const Common& c, const Gate& g)
{
    if (!c.check) return 0;
    std::cout << (g.ok ? "check passed: " : "check FAILED: ") << g.message << "\n";
    return g.ok ? 0 : kExitCheck;
}

std::string num(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---- subcommands ----

int cmd_sieve(const Common& c, const Params& prm)
{
    const i64 n = c.nmax > 0 ? c.nmax : 10000;
    Common cc = c;
    cc.nmax = n;
    const auto table = make_table(cc, n);
    const double kappa = load_kappa(c);

    fs::create_directories(c.out);
    const fs::path bin = fs::path(c.out) / "divisors.bin";
    {
        std::ofstream os(bin, std::ios::binary);
        table.write_binary(os);
    }
    std::cout << "wrote " << bin.string() << "\n";

    auto prefix = base_report("sieve_prefix", c, kappa);
    prefix.N = std::to_string(n);
    prefix.columns = {"N", "D"};
    for (i64 N = 1; N <= n; ++N) prefix.add_row({N, static_cast<std::int64_t>(table.D(N))});
    write_report(c, "sieve_prefix", prefix);

    auto resid = base_report("sieve_residual", c, kappa);
    resid.N = std::to_string(n);
    resid.columns = {"N", "D", "main_term", "residual", "residual_over_N34"};
    for (i64 N = 1; N <= n; N *= 2) {
        const double x = static_cast<double>(N);
        const double main = std::numbers::pi * std::numbers::pi * x * (std::log(x) + 2.0 * kappa - 1.0);
        const double r = static_cast<double>(table.D(N)) - main;
        resid.add_row({N, static_cast<std::int64_t>(table.D(N)), main, r, r / std::pow(x, 0.75)});
    }
    write_report(c, "sieve_residual", resid);
    (void)prm;

    Gate g;
    std::ifstream is(bin, std::ios::binary);
    const auto back = DivisorTable::read_binary(is);
    g.ok = back.values() == table.values() && back.nmax() == table.nmax();
    g.message = g.ok ? "dump reloads identically" : "dump does not reload identically";
    if (table.D(n) != divisor_summatory_hyperbola(n)) {
        g.ok = false;
        g.message += "; D(nmax) disagrees with the hyperbola count";
    }
    return finish(c, g);
}

int cmd_kappa(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{1'000'000} : prm.n;
    auto rep = base_report("kappa", c, 0.0);
    rep.N = join(ns);
    rep.columns = {"N", "kappa", "kappa_quarter", "difference"};
    Gate g;
    for (i64 N : ns) {
        require(N >= 4000, "--n must be >= 4000 so that N/4 is a valid cutoff");
        const double k = sierpinski_kappa(N), kq = sierpinski_kappa(N / 4);
        rep.add_row({N, k, kq, k - kq});
        std::cout << "kappa(" << N << ") = " << num(k) << "  kappa(" << N / 4 << ") = " << num(kq)
                  << "  difference = " << num(k - kq) << "\n";
        const double tol = 10.0 / std::sqrt(static_cast<double>(N / 4));
        if (std::abs(k - kq) > tol) {
            g.ok = false;
            g.message += "N=" + std::to_string(N) + " difference exceeds " + num(tol) + "; ";
        }
    }
    rep.kappa = sierpinski_kappa(ns.back());
    write_report(c, "kappa", rep);
    if (g.ok) g.message = "kappa estimates agree between N/4 and N";
    return finish(c, g);
}

int cmd_expsum_scan(const Common& c, const Params& prm)
{
    const i64 N = prm.n.empty() ? 10000 : prm.n.front();
    require(N >= 2, "--n must be >= 2");
    const double kappa = load_kappa(c);
    const auto grid = stratified_grid(static_cast<std::size_t>(prm.points), c.seed);
    const Sector omega = Sector::arc(prm.omega_lo, prm.omega_hi);
    DivisorTable table;
    if (prm.kind == "divisor" || prm.kind == "lo" || prm.kind == "hi") table = make_table(c, N);

    std::function<cplx(TorusPoint)> fn;
    std::function<double(TorusPoint)> shape;
    if (prm.kind == "divisor") {
        fn = [&](TorusPoint a) { return weighted_expsum_direct(table, N, omega, a).value; };
        shape = [&](TorusPoint) { return minor_arc_shape(N, c.delta); };
    } else if (prm.kind == "rotation") {
        require(prm.T >= 1, "--T must be >= 1");
        fn = [&](TorusPoint a) { return cplx(rotation_avg_lattice_expsum(N, omega, a, prm.T), 0.0); };
        shape = [&](TorusPoint a) { return rotation_sum_shape(N, a); };
    } else if (prm.kind == "logweighted") {
        fn = [&](TorusPoint a) { return log_weighted_expsum(N, a); };
        shape = [&](TorusPoint a) { return log_weighted_shape(N, a); };
    } else if (prm.kind == "lo") {
        require_delta(c.delta);
        fn = [&](TorusPoint a) { return A_hat(table, N, a) - lo_hat(N, c.delta, a, kappa); };
        shape = [&](TorusPoint) { return std::pow(static_cast<double>(N), -c.delta / 4.0); };
    } else if (prm.kind == "hi") {
        require_delta(c.delta);
        fn = [&](TorusPoint a) { return hi_hat(N, c.delta, a, table, kappa); };
        shape = [&](TorusPoint) { return 1.0 / std::log(static_cast<double>(N)); };
    } else {
        throw PreconditionError("--kind must be divisor, rotation, logweighted, lo or hi");
    }
    const auto scan = scan_multiplier(prm.kind, N, c.delta, grid, fn, shape);

    auto rep = base_report("expsum_scan", c, kappa);
    rep.N = std::to_string(N);
    rep.columns = {"kind", "alpha_x", "alpha_y", "re", "im", "abs", "shape", "ratio"};
    std::vector<double> ratios;
    for (std::size_t i = 0; i < scan.grid.size(); ++i) {
        const double a = std::abs(scan.values[i]);
        const double r = a / scan.bound_shape[i];
        ratios.push_back(r);
        rep.add_row({prm.kind, scan.grid[i].x, scan.grid[i].y, scan.values[i].real(), scan.values[i].imag(), a,
                     scan.bound_shape[i], r});
    }
    write_report(c, "expsum_scan", rep);
    Gate g;
    const double spread = max_over_median(ratios);
    g.ok = std::isfinite(spread) && spread <= 10.0;
    g.message = "max/median of the normalized values = " + num(spread) + " (gate 10)";
    return finish(c, g);
}

int cmd_major_error(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{10000, 100000} : prm.n;
    const i64 top = *std::max_element(ns.begin(), ns.end());
    const auto table = make_table(c, top);
    const double kappa = load_kappa(c);
    require(prm.T >= 8, "--T must be >= 8");
    const Sector omega = Sector::arc(prm.omega_lo, prm.omega_hi);

    std::vector<GaussInt> qs;
    std::stringstream ss(prm.q);
    std::string item;
    while (std::getline(ss, item, ',')) qs.push_back(parse_gauss(item));
    require(!qs.empty(), "--q needs at least one modulus");

    auto rep = base_report("major_error", c, kappa);
    rep.N = join(ns);
    rep.columns = {"N", "q", "q_norm", "a", "E_avg", "shape", "ratio", "direct_vs_hyperbola"};
    std::vector<double> ratios;
    for (i64 N : ns)
        for (GaussInt q : qs) {
            require(!q.is_zero(), "--q must be nonzero");
            const ReducedRational r(is_unit(q) ? GaussInt{0, 0} : GaussInt{1, 0}, q);
            const double e = error_EN_avg(table, N, r, omega, prm.T, kappa);
            const double shape = rational_error_shape(N, r.q_norm());
            const cplx d = weighted_expsum_direct(table, N, omega, r).value;
            const cplx h = weighted_expsum_hyperbola(N, omega, r).value;
            const double rel = std::abs(d - h) / std::max(std::abs(d), 1.0);
            std::ostringstream qs_, as_;
            qs_ << r.q();
            as_ << r.a();
            ratios.push_back(e / shape);
            rep.add_row({N, qs_.str(), r.q_norm(), as_.str(), e, shape, e / shape, rel});
        }
    write_report(c, "major_error", rep);
    Gate g;
    const double spread = max_over_median(ratios);
    double worst = 0.0;
    for (const auto& v : rep.values("direct_vs_hyperbola")) worst = std::max(worst, v);
    g.ok = spread <= 10.0 && worst <= 1e-6;
    g.message = "max/median = " + num(spread) + " (gate 10), direct vs hyperbola = " + num(worst) + " (gate 1e-6)";
    return finish(c, g);
}

int cmd_ramanujan(const Common& c, const Params& prm)
{
    require(prm.k >= 1, "--k must be >= 1");
    auto rep = base_report("ramanujan", c, 0.0);
    rep.columns = {"Q", "N", "k", "moment"};
    std::vector<double> x, y;
    for (i64 Q : prm.Q) {
        require(Q >= 2, "--Q entries must be >= 2");
        const i64 N = 10 * Q * Q * Q;
        const double m = ramanujan_moment(N, Q, prm.k);
        rep.add_row({Q, N, static_cast<std::int64_t>(prm.k), m});
        x.push_back(static_cast<double>(Q));
        y.push_back(m);
    }
    rep.N = "10Q^3";
    write_report(c, "ramanujan", rep);
    Gate g;
    const double slope = x.size() >= 2 ? loglog_slope(x, y) : 0.0;
    g.ok = slope <= 0.3;
    g.message = "fitted exponent = " + num(slope) + " (gate 0.3)";
    return finish(c, g);
}

int cmd_improving(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{10000, 40000} : prm.n;
    const int trials = prm.trials > 0 ? prm.trials : 200;
    const auto table = make_table(c, *std::max_element(ns.begin(), ns.end()));
    const double kappa = load_kappa(c);
    ExperimentReport all;
    std::vector<double> per_scale;
    double density_spread = 0.0;
    for (i64 N : ns) {
        const auto rep = improving_experiment(table, N, prm.p, trials, c.seed, kappa);
        if (all.columns.empty()) {
            all = rep;
            all.columns.insert(all.columns.begin(), "N");
            all.rows.clear();
        }
        for (auto row : rep.rows) {
            row.insert(row.begin(), Cell{N});
            all.rows.push_back(row);
        }
        const auto m = rep.values("max_ratio");
        per_scale.push_back(max_of(m));
        density_spread = std::max(density_spread, max_of(m) / m.front());
    }
    all.N = join(ns);
    write_report(c, "improving", all);
    Gate g;
    double scale_spread = 1.0;
    for (double a : per_scale)
        for (double b : per_scale) scale_spread = std::max(scale_spread, a / b);
    g.ok = density_spread <= 3.0 && scale_spread <= 2.0;
    g.message = "cross-density " + num(density_spread) + " (gate 3), cross-scale " + num(scale_spread) + " (gate 2)";
    return finish(c, g);
}

int cmd_sharpness(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{10000, 40000, 160000} : prm.n;
    const auto table = make_table(c, 4 * *std::max_element(ns.begin(), ns.end()));
    const double kappa = load_kappa(c);
    auto rep = sharpness_experiment(table, ns, kappa);
    rep.seed = c.seed;
    write_report(c, "sharpness", rep);
    const auto r = rep.values("r");
    const auto rl = rep.values("r_over_logN");
    Gate g;
    bool big = !r.empty();
    for (double v : r) big = big && v >= 1.0;
    double lo = 1e300, hi = 0.0;
    for (double v : rl) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    g.ok = big && rl.size() == ns.size() && hi <= 4.0 * lo;
    g.message = "r/log N spread " + num(hi / lo) + " (gate 4), all r >= 1: " + (big ? "yes" : "no");
    return finish(c, g);
}

int cmd_weighted(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{16, 64, 256, 1024} : prm.n;
    const std::vector<i64> boxes = prm.boxes.empty() ? std::vector<i64>{32, 64} : prm.boxes;
    const int trials = prm.trials > 0 ? prm.trials : 10;
    const auto table = make_table(c, *std::max_element(ns.begin(), ns.end()));
    const double kappa = load_kappa(c);
    auto rep = weighted_maximal_experiment(table, prm.p, prm.gamma, ns, trials, boxes, c.seed, kappa);
    write_report(c, "weighted", rep);
    const auto m = rep.values("max_R");
    Gate g;
    const double spread = max_of(m) / *std::min_element(m.begin(), m.end());
    g.ok = std::isfinite(spread) && spread <= 3.0;
    g.message = "max_R spread across box sizes " + num(spread) + " (gate 3)";
    return finish(c, g);
}

int cmd_sparse(const Common& c, const Params& prm)
{
    const std::vector<i64> ns = prm.n.empty() ? std::vector<i64>{16, 64, 256} : prm.n;
    const std::vector<i64> boxes = prm.boxes.empty() ? std::vector<i64>{32, 64} : prm.boxes;
    const int trials = prm.trials > 0 ? prm.trials : 10;
    const auto table = make_table(c, *std::max_element(ns.begin(), ns.end()));
    const double kappa = load_kappa(c);
    auto rep = sparse_experiment(table, ns, prm.r_exp, prm.s_exp, trials, boxes, c.seed, kappa);
    write_report(c, "sparse", rep);
    Gate g;
    double fails = 0.0;
    for (double v : rep.values("audit_failures")) fails += v;
    const auto m = rep.values("max_ratio");
    const double spread = max_of(m) / *std::min_element(m.begin(), m.end());
    g.ok = fails == 0.0 && spread <= 3.0;
    g.message = "sparseness audit failures " + num(fails) + ", ratio spread across boxes " + num(spread) + " (gate 3)";
    return finish(c, g);
}

double max_at(const ExperimentReport& rep, i64 k)
{
    const auto ks = rep.values("k");
    const auto v = rep.values("cumulative_ratio");
    double m = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (static_cast<i64>(ks[i]) == k) m = std::max(m, v[i]);
    return m;
}

Gate summability_gate(const ExperimentReport& rep, int kmax)
{
    Gate g;
    const int mid = std::max(1, kmax * 2 / 3);
    const double a = max_at(rep, mid), b = max_at(rep, kmax);
    g.ok = std::isfinite(b) && b <= 3.0 * std::max(a, 1e-300);
    g.message = "cumulative ratio at k=" + std::to_string(mid) + " " + num(a) + ", at k=" + std::to_string(kmax) +
                " " + num(b) + " (gate 3x)";
    return g;
}

int cmd_oscillation(const Common& c, const Params& prm)
{
    const int trials = prm.trials > 0 ? prm.trials : 20;
    const auto table = make_table(c, i64{1} << (prm.kmax + 1));
    const double kappa = load_kappa(c);
    auto rep = oscillation_experiment(table, prm.R, prm.kmax, trials, prm.box, c.seed, kappa);
    write_report(c, "oscillation", rep);
    return finish(c, summability_gate(rep, prm.kmax));
}

int cmd_sqfunc(const Common& c, const Params& prm)
{
    const int trials = prm.trials > 0 ? prm.trials : 20;
    const auto top = static_cast<i64>(std::ceil(std::pow(prm.rho, prm.kmax) - 1e-9));
    const auto table = make_table(c, top);
    const double kappa = load_kappa(c);
    auto rep = square_function_experiment(table, prm.rho, trials, prm.kmax, prm.box, c.seed, !prm.no_cutoff, kappa);
    write_report(c, "sqfunc", rep);
    return finish(c, summability_gate(rep, prm.kmax));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Divisor averages over the Gaussian integers: experiments and tables"};
    app.require_subcommand(1);

    Common common;
    Params prm;
    struct Entry {
        std::string name;
        std::string help;
        int (*run)(const Common&, const Params&);
        CLI::App* sub{nullptr};
    };
    std::vector<Entry> entries = {
        {"sieve", "Build and dump the divisor table with D(N) and its residual", cmd_sieve},
        {"kappa", "Estimate kappa and compare the cutoffs N/4 and N", cmd_kappa},
        {"expsum-scan", "Scan an exponential sum or multiplier over a frequency grid", cmd_expsum_scan},
        {"major-error", "Rotation-averaged error of the rational main term", cmd_major_error},
        {"ramanujan", "Moments of Ramanujan sums", cmd_ramanujan},
        {"improving", "l^p-improving ratios for random indicators", cmd_improving},
        {"sharpness", "Endpoint example for the improving inequality", cmd_sharpness},
        {"weighted", "Weighted maximal-function ratios", cmd_weighted},
        {"sparse", "Greedy sparse bounds for the maximal function", cmd_sparse},
        {"oscillation", "Oscillation sums over lacunary scales", cmd_oscillation},
        {"sqfunc", "Square function of A_N minus its main term", cmd_sqfunc},
    };
    for (auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_common(sub, common);
        sub->add_option("--n", prm.n, "Scale(s) N, comma separated")->delimiter(',');
        sub->add_option("--p", prm.p, "Exponent p");
        sub->add_option("--rho", prm.rho, "Growth factor of the scales");
        sub->add_option("--R", prm.R, "Lacunarity parameter of the scale set");
        sub->add_option("--gamma", prm.gamma, "Weight exponent");
        sub->add_option("--q", prm.q, "Moduli such as 1,1+i,2+i");
        sub->add_option("--omega-lo", prm.omega_lo, "Sector start angle");
        sub->add_option("--omega-hi", prm.omega_hi, "Sector end angle");
        sub->add_option("--trials", prm.trials, "Random trials");
        sub->add_option("--kmax", prm.kmax, "Largest scale index");
        sub->add_option("--box", prm.box, "Side of the test box");
        sub->add_option("--boxes", prm.boxes, "Box sides, comma separated")->delimiter(',');
        sub->add_option("--T", prm.T, "Rotations in the average");
        sub->add_option("--k", prm.k, "Moment order");
        sub->add_option("--Q", prm.Q, "Denominator cutoffs, comma separated")->delimiter(',');
        sub->add_option("--kind", prm.kind, "divisor, rotation, logweighted, lo or hi");
        sub->add_option("--points", prm.points, "Grid size for scans");
        sub->add_option("--r-exp", prm.r_exp, "Sparse exponent r");
        sub->add_option("--s-exp", prm.s_exp, "Sparse exponent s");
        sub->add_flag("--no-cutoff", prm.no_cutoff, "Ignore the switch-off rule for the main term");
        e.sub = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitPrecondition;
    }

    try {
        for (auto& e : entries) {
            if (!e.sub->parsed()) continue;
            if (!common.config.empty()) apply_config(e.sub, common.config);
            require(common.delta > 0.0 && common.delta <= 1.0 / 20.0, "--delta must lie in (0, 1/20]");
            set_threads(common.threads);
            return e.run(common, prm);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
