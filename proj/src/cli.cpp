#include "zkrect/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "zkrect/decay.hpp"
#include "zkrect/error.hpp"
#include "zkrect/roots.hpp"

namespace zkrect::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

class Schema {
public:
    explicit Schema(const json& d) : doc(d) {}

    double number(const std::string& key, double def, bool (*ok)(double), const char* rule)
    {
        seen.push_back(key);
        if (!doc.contains(key)) return def;
        const json& v = doc[key];
        if (!v.is_number()) {
            problems.push_back("/" + key + ": expected a number");
            return def;
        }
        const double x = v.get<double>();
        if (ok && !ok(x)) problems.push_back("/" + key + ": must be " + rule);
        return x;
    }

    int integer(const std::string& key, int def, int lo)
    {
        seen.push_back(key);
        if (!doc.contains(key)) return def;
        const json& v = doc[key];
        if (!v.is_number_integer()) {
            problems.push_back("/" + key + ": expected an integer");
            return def;
        }
        const long long x = v.get<long long>();
        if (x < lo || x > 1000000) {
            problems.push_back("/" + key + ": must be in [" + std::to_string(lo) + ", 1000000]");
            return def;
        }
        return static_cast<int>(x);
    }

    bool boolean(const std::string& key, bool def)
    {
        seen.push_back(key);
        if (!doc.contains(key)) return def;
        if (!doc[key].is_boolean()) {
            problems.push_back("/" + key + ": expected a boolean");
            return def;
        }
        return doc[key].get<bool>();
    }

    std::string string(const std::string& key, const std::string& def)
    {
        seen.push_back(key);
        if (!doc.contains(key)) return def;
        if (!doc[key].is_string()) {
            problems.push_back("/" + key + ": expected a string");
            return def;
        }
        return doc[key].get<std::string>();
    }

    void unknown_keys()
    {
        for (const auto& [k, v] : doc.items())
            if (std::find(seen.begin(), seen.end(), k) == seen.end()) problems.push_back("/" + k + ": unknown field");
    }

    const json& doc;
    std::vector<std::string> seen;
    std::vector<std::string> problems;
};

bool positive(double x) { return x > 0 && std::isfinite(x); }
bool finite(double x) { return std::isfinite(x); }
bool nonneg(double x) { return x >= 0 && std::isfinite(x); }
bool open_unit(double x) { return x > 0 && x < 1; }

std::string iso_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string num17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    std::ofstream f(p);
    if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << num17(r[i]);
        f << '\n';
    }
}

void write_json(const fs::path& p, const json& j)
{
    std::ofstream f(p);
    if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
    f << j.dump(2) << '\n';
}

ModalField random_field(const Space& s, std::mt19937_64& gen, int kmax, double norm)
{
    std::normal_distribution<double> N(0.0, 1.0);
    ModalField u = s.zero();
    for (int l = 0; l < s.modes(); ++l)
        for (int k = 1; k <= kmax; ++k) {
            const double c = N(gen) / (k * k) / (1 + l);
            for (int i = 0; i < s.nodes(); ++i) u(l, i) += c * std::sin(k * std::numbers::pi * s.x[i] / s.cfg.R);
        }
    if (norm == 0.0) return s.zero();
    return u * (norm / std::sqrt(s.norm2(u)));
}

ModalField initial_field(const std::string& csv, const Space& s, std::mt19937_64& gen, int kmax, double norm)
{
    ModalField u = random_field(s, gen, kmax, norm);  // always drawn, keeps the stream stable
    if (!csv.empty()) u = read_modal_csv(csv, s);
    return u;
}

// Outcome of one subcommand.
struct Result {
    json summary;
    std::vector<std::string> files;
    int code = 0;
};

struct Context {
    RunConfig cfg;
    fs::path out;
    std::uint64_t seed = 0;
    std::ostream* log = nullptr;
};

Result do_simulate(const Context& c)
{
    Space s(c.cfg.problem, c.cfg.grid);
    std::mt19937_64 gen(c.seed);
    const ModalField u0 = initial_field(c.cfg.u0_csv, s, gen, c.cfg.kmax, c.cfg.amplitude);
    SimOptions so;
    so.step.nonlinear = c.cfg.nonlinear;
    const Trajectory tr = simulate(s, u0, {}, so);
    const EnergyReport er = energy_report(tr, Weight::One, s);
    Result r;
    r.summary = {{"steps", s.steps},
                 {"dt", s.dt()},
                 {"initial_norm2", tr.norm2.front()},
                 {"final_norm2", tr.norm2.back()},
                 {"max_picard_iterations", tr.max_picard},
                 {"energy_max_rel_residual", er.max_rel_residual}};
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < tr.t.size(); ++n) rows.push_back({tr.t[n], tr.norm2[n]});
    write_csv(c.out / "norms.csv", {"t", "norm2"}, rows);
    rows.clear();
    for (int l = 0; l < s.modes(); ++l)
        for (int i = 0; i < s.nodes(); ++i) rows.push_back({double(l + 1), double(i), s.x[i], tr.final_state(l, i)});
    write_csv(c.out / "final_state.csv", {"l", "i", "x", "value"}, rows);
    r.files = {"norms.csv", "final_state.csv"};
    return r;
}

Result do_decay(const Context& c)
{
    Space s(c.cfg.problem, c.cfg.grid);
    std::mt19937_64 gen(c.seed);
    const ModalField u0 = initial_field(c.cfg.u0_csv, s, gen, c.cfg.kmax, c.cfg.amplitude);
    DecayOptions opt;
    opt.nonlinear = c.cfg.nonlinear;
    const DecayReport d = verify_decay(s, c.cfg.delta, u0, {}, opt);
    Result r;
    r.summary = {{"kappa", d.kappa},
                 {"eps0", d.eps0},
                 {"delta", d.delta},
                 {"admissible", d.admissible},
                 {"bound_satisfied", d.bound_satisfied},
                 {"data_size_sq", d.data_size_sq},
                 {"min_margin", d.min_margin},
                 {"inputs",
                  {{"R", s.cfg.R}, {"L", s.cfg.L}, {"b", s.cfg.b}, {"case", std::string(1, case_tag(s.cfg.bc))}}}};
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < d.t.size(); ++n) rows.push_back({d.t[n], d.norm2[n], d.bound[n], d.margin[n]});
    write_csv(c.out / "decay.csv", {"t", "norm2", "bound", "margin"}, rows);
    r.files = {"decay.csv"};
    if (!d.admissible) {
        *c.log << "hypothesis violated: kappa " << d.kappa << ", data size " << std::sqrt(d.data_size_sq)
               << " vs eps0 " << d.eps0 << "\n";
        r.code = 2;
    } else if (!d.bound_satisfied) {
        *c.log << "decay bound violated, min margin " << d.min_margin << "\n";
        r.code = 2;
    }
    return r;
}

Result do_control(const Context& c)
{
    Result r;
    const auto crit = critical_length_check(c.cfg.problem, 20, 20);
    json hits = json::array();
    for (const auto& h : crit)
        if (h.match) hits.push_back({{"l", h.l}, {"k", h.k}, {"m", h.m}, {"R_crit", h.R_crit}});
    if (!hits.empty()) {
        r.summary = {{"critical_length", hits}};
        *c.log << "R is a critical length; controllability is not claimed\n";
        r.code = 2;
        return r;
    }
    Space s(c.cfg.problem, c.cfg.grid);
    std::mt19937_64 gen(c.seed);
    const ModalField u0 = initial_field(c.cfg.u0_csv, s, gen, c.cfg.kmax, c.cfg.amplitude);
    const ModalField uT = initial_field(c.cfg.uT_csv, s, gen, c.cfg.kmax, c.cfg.target_amplitude);
    Controller ctl(s, c.cfg.control);
    ControlResult cr;
    try {
        cr = c.cfg.nonlinear ? ctl.nonlinear_control(u0, uT) : ctl.linear_control(u0, uT);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearUncontrollable && e.kind() != ErrorKind::DataTooLarge) throw;
        r.summary = {{"error", kind_name(e.kind())}, {"message", e.what()}};
        *c.log << kind_name(e.kind()) << ": " << e.what() << "\n";
        r.code = 2;
        return r;
    }
    r.summary = {{"mode", c.cfg.nonlinear ? "nonlinear" : "linear"},
                 {"terminal_error", cr.terminal_error},
                 {"krylov_iterations", cr.cg_trace.empty() ? 0 : cr.cg_trace.size() - 1},
                 {"krylov_residuals", cr.cg_trace},
                 {"fixed_point_trace", cr.picard_trace},
                 {"contraction", cr.contraction},
                 {"fixed_point_gap", cr.fixed_point_gap},
                 {"control_norm", std::sqrt(ctl.control_inner(cr.nu1, cr.nu1))},
                 {"u0_norm", std::sqrt(s.norm2(u0))},
                 {"uT_norm", std::sqrt(s.norm2(uT))}};
    std::vector<std::vector<double>> rows;
    for (Eigen::Index j = 0; j < cr.nu1.cols(); ++j)
        for (Eigen::Index l = 0; l < cr.nu1.rows(); ++l) rows.push_back({j * s.dt(), double(l + 1), cr.nu1(l, j)});
    write_csv(c.out / "nu1.csv", {"t", "l", "value"}, rows);
    r.files = {"nu1.csv"};
    return r;
}

Result do_spectrum(const Context& c)
{
    Space s(c.cfg.problem, c.cfg.grid);
    Result r;
    json modes = json::array();
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < s.modes(); ++k) {
        const ModeOperator op = build_mode_operator(k, s);
        // spectrum of the semi-discrete generator u_t = -A u
        const Eigen::MatrixXd G = -op.A;
        const double re = Eigen::EigenSolver<Eigen::MatrixXd>(G, false).eigenvalues().real().maxCoeff();
        modes.push_back({{"l", k + 1}, {"lambda", s.sys.lambda[k]}, {"a", op.a}, {"max_re_eig", re}});
        rows.push_back({double(k + 1), s.sys.lambda[k], op.a, re});
    }
    json crit = json::array();
    for (const auto& h : critical_length_check(s.cfg, 5, 5))
        crit.push_back({{"l", h.l}, {"k", h.k}, {"m", h.m}, {"R_crit", h.R_crit}, {"match", h.match}});
    r.summary = {{"modes", modes}, {"critical_lengths", crit}};
    write_csv(c.out / "spectrum.csv", {"l", "lambda", "a", "max_re_eig"}, rows);
    r.files = {"spectrum.csv"};
    return r;
}

Result do_potentials(const Context& c)
{
    const auto& p = c.cfg.problem;
    const EigenSystem sys = eigen_system(p.bc, p.L, c.cfg.grid.n_modes);
    auto bump = [](double t) { return std::abs(t) < 1 ? std::pow(1 - t * t, 2) : 0.0; };
    const double dt = 0.01;
    const int nt = 401;
    Eigen::MatrixXd nu(nt, sys.quad.size());
    for (int j = 0; j < nt; ++j)
        for (std::size_t q = 0; q < sys.quad.size(); ++q) nu(j, q) = bump(-2 + j * dt) * sys.psi(0, sys.quad.nodes[q]);
    const TraceHat hat = trace_hat(nu, -2.0, dt, sys, c.cfg.theta);
    const std::vector<double> ys = {0.2 * p.L, 0.5 * p.L, 0.8 * p.L};
    double e2 = 0, n2 = 0, dj0 = 0, j1 = 0;
    for (int j = 0; j <= 30; ++j) {
        const double t = -1.5 + 0.1 * j;
        const auto a = eval_j0(hat, p.b, t, 0.0, ys);
        const auto d = eval_potential(hat, Potential::J0, p.b, t, 0.0, ys, 1);
        const auto e = eval_j1(hat, p.b, t, 0.0, ys);
        for (std::size_t q = 0; q < ys.size(); ++q) {
            const double v = bump(t) * sys.psi(0, ys[q]);
            e2 += std::pow(a.values[q] - v, 2);
            n2 += v * v;
            dj0 = std::max(dj0, std::abs(d.values[q]));
            j1 = std::max(j1, std::abs(e.values[q]));
        }
    }
    const double scale = std::sqrt(n2 / (31.0 * ys.size()));
    std::vector<std::vector<double>> rows;
    const std::vector<double> ymid = {0.5 * p.L};
    for (int j = 0; j <= 30; ++j)
        for (int i = 0; i <= 20; ++i) {
            const double t = -1.5 + 0.1 * j, x = -2.0 + 0.1 * i;
            rows.push_back({t, x, eval_j0(hat, p.b, t, x, ymid).values[0], eval_j1(hat, p.b, t, x, ymid).values[0]});
        }
    write_csv(c.out / "potentials.csv", {"t", "x", "J0", "J1"}, rows);
    Result r;
    r.summary = {{"trace", "bump(t) psi_1(y)"},
                 {"J0_trace_rel_error", std::sqrt(e2 / n2)},
                 {"dxJ0_trace_rel", dj0 / scale},
                 {"J1_trace_rel", j1 / scale},
                 {"theta_max", c.cfg.theta.theta_max},
                 {"dtheta", c.cfg.theta.dtheta},
                 {"truncated", hat.truncated}};
    r.files = {"potentials.csv"};
    return r;
}

Result do_inequalities(const Context& c)
{
    Space s(c.cfg.problem, c.cfg.grid);
    std::mt19937_64 gen(c.seed);
    std::normal_distribution<double> N(0, 1);
    const int sigma = (s.cfg.bc == BcCase::DirichletDirichlet || s.cfg.bc == BcCase::DirichletNeumann) ? 0 : 1;
    const double L = s.cfg.L, pi = std::numbers::pi;
    double m14 = 0, m15 = 0, mst1 = 0, mst2 = 0;
    std::vector<std::vector<double>> rows;
    for (int n = 0; n < c.cfg.samples; ++n) {
        const ModalField phi = random_field(s, gen, c.cfg.kmax, 1.0);
        const auto ir = check_interpolation(s, phi, sigma);
        std::vector<double> a(6);
        for (auto& v : a) v = N(gen);
        auto f1 = [&](double y) { double v = 0; for (int k = 0; k < 6; ++k) v += a[k] * std::sin((k + 1) * pi * y / L); return v; };
        auto d1 = [&](double y) { double v = 0; for (int k = 0; k < 6; ++k) v += a[k] * (k + 1) * pi / L * std::cos((k + 1) * pi * y / L); return v; };
        auto f2 = [&](double y) { double v = 0; for (int k = 0; k < 6; ++k) v += a[k] * std::sin((2 * k + 1) * pi * y / (2 * L)); return v; };
        auto d2 = [&](double y) { double v = 0; for (int k = 0; k < 6; ++k) v += a[k] * (2 * k + 1) * pi / (2 * L) * std::cos((2 * k + 1) * pi * y / (2 * L)); return v; };
        const double s1 = check_steklov(f1, d1, L, Steklov::Dirichlet);
        const double s2 = check_steklov(f2, d2, L, Steklov::HalfDirichlet);
        m14 = std::max(m14, ir.r14);
        m15 = std::max(m15, ir.r15);
        mst1 = std::max(mst1, s1);
        mst2 = std::max(mst2, s2);
        rows.push_back({double(n), ir.r14, ir.r15, s1, s2});
    }
    write_csv(c.out / "ratios.csv", {"sample", "four_power", "three_power", "steklov_dirichlet", "steklov_half"}, rows);
    Result r;
    r.summary = {{"samples", c.cfg.samples},
                 {"sigma", sigma},
                 {"max_four_power_ratio", m14},
                 {"max_three_power_ratio", m15},
                 {"max_steklov_dirichlet", mst1},
                 {"max_steklov_half", mst2}};
    r.files = {"ratios.csv"};
    if (std::max({m14, m15, mst1, mst2}) > 1.0) {
        *c.log << "an inequality ratio exceeds 1\n";
        r.code = 2;
    }
    return r;
}

std::string format_c(cplx z)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig load_config(const json& doc)
{
    if (!doc.is_object()) fail(ErrorKind::Schema, "/: configuration must be a JSON object");
    Schema sc(doc);
    RunConfig c;
    c.problem.R = sc.number("R", c.problem.R, positive, "positive");
    c.problem.L = sc.number("L", c.problem.L, positive, "positive");
    c.problem.b = sc.number("b", c.problem.b, finite, "finite");
    c.problem.T = sc.number("T", c.problem.T, positive, "positive");
    const std::string tag = sc.string("case", "a");
    if (tag.size() != 1 || tag[0] < 'a' || tag[0] > 'd')
        sc.problems.push_back("/case: must be one of \"a\", \"b\", \"c\", \"d\"");
    else
        c.problem.bc = parse_case(tag);
    c.grid.Nx = sc.integer("Nx", 64, 8);
    c.grid.n_modes = sc.integer("n_modes", 16, 1);
    c.delta = sc.number("delta", 0.5, open_unit, "in (0, 1)");
    c.nonlinear = sc.boolean("nonlinear", true);
    c.amplitude = sc.number("amplitude", 0.1, nonneg, "nonnegative");
    c.target_amplitude = sc.number("target_amplitude", c.amplitude, nonneg, "nonnegative");
    c.kmax = sc.integer("kmax", 6, 1);
    c.u0_csv = sc.string("u0_csv", "");
    c.uT_csv = sc.string("uT_csv", "");
    c.control.tol_cg = sc.number("tol_cg", 1e-4, positive, "positive");
    c.control.max_cg = sc.integer("max_cg", 500, 1);
    c.control.plateau = sc.integer("plateau", 50, 1);
    c.control.tol_theta = sc.number("tol_theta", 1e-8, positive, "positive");
    c.control.max_theta = sc.integer("max_theta", 100, 1);
    c.control.smallness = sc.number("smallness", -1.0, finite, "finite");
    c.theta.dtheta = sc.number("dtheta", 0.05, positive, "positive");
    c.theta.theta_max = sc.number("theta_max", 40.0, positive, "positive");
    c.samples = sc.integer("samples", 200, 1);
    const double h = c.problem.R / c.grid.Nx;
    const double amp = std::max({c.amplitude, c.target_amplitude, 1e-12});
    const double dt_default = std::min({1e-2, 0.5 * h / amp, c.problem.T});
    c.grid.dt = sc.number("dt", dt_default, positive, "positive");
    sc.unknown_keys();
    if (c.grid.dt > c.problem.T) sc.problems.push_back("/dt: must not exceed T");
    if (!sc.problems.empty()) {
        std::string msg = "configuration invalid:";
        for (const auto& p : sc.problems) msg += "\n  " + p;
        fail(ErrorKind::Schema, msg);
    }
    c.echo = {{"R", c.problem.R},
              {"L", c.problem.L},
              {"b", c.problem.b},
              {"case", std::string(1, case_tag(c.problem.bc))},
              {"T", c.problem.T},
              {"Nx", c.grid.Nx},
              {"n_modes", c.grid.n_modes},
              {"dt", c.grid.dt},
              {"delta", c.delta},
              {"nonlinear", c.nonlinear},
              {"amplitude", c.amplitude},
              {"target_amplitude", c.target_amplitude},
              {"kmax", c.kmax},
              {"u0_csv", c.u0_csv},
              {"uT_csv", c.uT_csv},
              {"tol_cg", c.control.tol_cg},
              {"max_cg", c.control.max_cg},
              {"plateau", c.control.plateau},
              {"tol_theta", c.control.tol_theta},
              {"max_theta", c.control.max_theta},
              {"smallness", c.control.smallness},
              {"dtheta", c.theta.dtheta},
              {"theta_max", c.theta.theta_max},
              {"samples", c.samples}};
    return c;
}

RunConfig load_config_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) fail(ErrorKind::Io, "cannot open config " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Schema, "/: " + path + " is not valid JSON: " + e.what());
    }
    return load_config(doc);
}

ModalField read_modal_csv(const std::string& path, const Space& space)
{
    std::ifstream f(path);
    if (!f) fail(ErrorKind::Io, "cannot open " + path);
    ModalField u = space.zero();
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        double l, i, v;
        if (!(is >> l >> i >> v))
            fail(ErrorKind::InvalidInput, path + ":" + std::to_string(lineno) + ": expected l,i,value");
        if (l < 1 || l > space.modes() || i < 0 || i >= space.nodes())
            fail(ErrorKind::Shape, path + ":" + std::to_string(lineno) + ": index out of range");
        u(static_cast<int>(l) - 1, static_cast<int>(i)) = v;
    }
    return u;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Zakharov-Kuznetsov rectangle laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = "zkrect_out";
    std::uint64_t seed = 0;
    int threads = 0;
    std::optional<double> delta, T, dt, theta, a;
    std::optional<int> nx, modes;
    std::optional<std::string> bc;
    app.add_option("--config", config_path, "JSON configuration");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads (ZKRECT_THREADS fallback)");
    app.add_option("--delta", delta);
    app.add_option("--case", bc);
    app.add_option("--T", T);
    app.add_option("--nx", nx);
    app.add_option("--modes", modes);
    app.add_option("--dt", dt);
    app.add_option("--theta", theta, "roots: theta");
    app.add_option("--a", a, "roots: a");
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"simulate", "run the solver on u0 with homogeneous data"},
        {"decay-verify", "check the exponential decay bound"},
        {"control", "steer u0 to uT through u_x(t,R,y)"},
        {"spectrum", "mode eigenvalues, operator spectra, critical lengths"},
        {"potentials", "boundary potential traces for a bump trace"},
        {"check-inequalities", "interpolation and Steklov ratios on random fields"},
        {"roots", "limit root pair for --theta, --a"}};
    for (const auto& [name, desc] : subs) app.add_subcommand(name, desc);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        if (sub == "roots") {
            const RootPair p = limit_root_pair(theta.value_or(0.0), a.value_or(0.0));
            out << "r1 = " << format_c(p.r1) << "\nr2 = " << format_c(p.r2) << "\n";
            if (out_opt->count() > 0) {
                fs::create_directories(out_dir);
                write_json(fs::path(out_dir) / "summary.json",
                           {{"theta", p.theta}, {"a", p.a}, {"r1", {p.r1.real(), p.r1.imag()}},
                            {"r2", {p.r2.real(), p.r2.imag()}}});
            }
            return 0;
        }

        json doc = json::object();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) fail(ErrorKind::Io, "cannot open config " + config_path);
            try {
                doc = json::parse(f);
            } catch (const json::parse_error& e) {
                fail(ErrorKind::Schema, "/: " + config_path + " is not valid JSON: " + e.what());
            }
        }
        if (!doc.is_object()) fail(ErrorKind::Schema, "/: configuration must be a JSON object");
        if (delta) doc["delta"] = *delta;
        if (bc) doc["case"] = *bc;
        if (T) doc["T"] = *T;
        if (nx) doc["Nx"] = *nx;
        if (modes) doc["n_modes"] = *modes;
        if (dt) doc["dt"] = *dt;

        Context ctx;
        ctx.cfg = load_config(doc);
        ctx.out = out_dir;
        ctx.seed = seed;
        ctx.log = &err;
        if (threads <= 0) {
            const char* env = std::getenv("ZKRECT_THREADS");
            threads = env ? std::max(1, std::atoi(env)) : 1;
        }
        fs::create_directories(ctx.out);
        const std::string started = iso_now();

        static const std::map<std::string, Result (*)(const Context&)> table = {
            {"simulate", do_simulate},       {"decay-verify", do_decay},     {"control", do_control},
            {"spectrum", do_spectrum},       {"potentials", do_potentials}, {"check-inequalities", do_inequalities}};
        Result r = table.at(sub)(ctx);
        r.summary["subcommand"] = sub;
        r.summary["config"] = ctx.cfg.echo;
        r.summary["seed"] = seed;
        write_json(ctx.out / "summary.json", r.summary);
        r.files.insert(r.files.begin(), "summary.json");

        json manifest = {{"tool", "zkrect"},
                         {"version", kVersion},
                         {"subcommand", sub},
                         {"config_path", config_path},
                         {"seed", seed},
                         {"threads", threads},
                         {"output_dir", ctx.out.string()},
                         {"config", ctx.cfg.echo},
                         {"outputs", r.files},
                         {"exit_code", r.code},
                         {"started", started},
                         {"finished", iso_now()}};
        write_json(ctx.out / "manifest.json", manifest);
        out << r.summary.dump(2) << "\n";
        return r.code;
    } catch (const Error& e) {
        err << "error [" << kind_name(e.kind()) << "]: " << e.what() << "\n";
        return (e.kind() == ErrorKind::NearUncontrollable || e.kind() == ErrorKind::DataTooLarge) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace zkrect::cli
