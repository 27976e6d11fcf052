#include "onsager/cli.hpp"

#include "onsager/bingham.hpp"
#include "onsager/harmonic_map.hpp"
#include "onsager/kernel_ops.hpp"
#include "onsager/minimizer.hpp"
#include "onsager/onsager_energy.hpp"
#include "onsager/sphere_quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace onsager {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key, key + ": not a number: '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, key + ": not an integer: '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const long long x = to_integer(key, v);
    if (x < -1000000000LL || x > 1000000000LL) throw ConfigError(key, key + ": out of range");
    return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        std::istringstream words(item);
        std::string w;
        while (words >> w) out.push_back(to_double(key, w));
    }
    if (out.empty()) throw ConfigError(key, key + ": empty list");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, key + ": " + what);
}

std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

class Output {
public:
    Output(const RunConfig& cfg, const std::string& command) : cfg_(cfg), command_(command) {
        dir_ = fs::path(cfg.out_dir);
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw ConfigError("out_dir", "out_dir: cannot create '" + cfg.out_dir + "'");
        stem_ = command + "_" + timestamp();
        for (int k = 1; fs::exists(dir_ / (stem_ + ".csv")); ++k) stem_ = command + "_" + timestamp() + "_" + std::to_string(k);
    }

    std::string csv_path() { return record(stem_ + ".csv"); }
    std::string side_path(const std::string& suffix) { return record(stem_ + "_" + suffix); }

    void write_manifest(std::ostream& out) const {
        const fs::path p = dir_ / "manifest.txt";
        std::ofstream m(p);
        if (!m) throw InvalidArgument("cannot write " + p.string());
        RunConfig c = cfg_;
        c.command = command_;
        m << c.manifest();
        for (const auto& f : files_) m << "output=" << f << "\n";
        out << p.string() << "\n";
        for (const auto& f : files_) out << (dir_ / f).string() << "\n";
    }

private:
    std::string record(const std::string& name) {
        files_.push_back(name);
        return (dir_ / name).string();
    }

    const RunConfig& cfg_;
    std::string command_;
    fs::path dir_;
    std::string stem_;
    std::vector<std::string> files_;
};

struct CsvFile {
    explicit CsvFile(const std::string& path) : f(path) {
        if (!f) throw InvalidArgument("cannot write " + path);
    }
    void line(const std::string& s) { f << s << "\n"; }
    std::ofstream f;
};

BinghamEvaluator evaluator(const RunConfig& c) { return BinghamEvaluator(build_grid(c.sphere_polar, c.sphere_azimuth)); }

KernelSpec kernel(const RunConfig& c) { return KernelSpec(c.dimension, c.kernel_a); }

// Sum of random Fourier modes with integer wave numbers |k_i| <= kmax, periodic on the box.
ScalarField band_limited(const LatticeBox& lat, std::mt19937_64& rng, int kmax, int modes) {
    std::uniform_int_distribution<int> kd(-kmax, kmax);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    std::normal_distribution<double> amp;
    ScalarField f(lat.size(), 0.0);
    for (int m = 0; m < modes; ++m) {
        const Vec3 k(kd(rng), kd(rng), lat.dim() == 3 ? kd(rng) : 0);
        const double p = ph(rng), c = amp(rng);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += c * std::cos(2.0 * kPi * k.dot(lat.position(i)) / lat.length() + p);
    }
    return f;
}

std::string row(std::initializer_list<std::string> cells) {
    std::string s;
    for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
    return s;
}

void phase_diagram(const RunConfig& c, Output& o) {
    CsvFile csv(o.csv_path());
    csv.line("eta,alpha,s2,eta_over_alpha,identity_residual");
    for (int k = 0; k < c.eta_points; ++k) {
        const double eta = c.eta_max * k / (c.eta_points - 1);
        const double a = alpha_of_eta(eta);
        const double s2 = s2_of_eta(eta);
        const double ratio = eta / a;
        csv.line(row({fmt(eta), fmt(a), fmt(s2), fmt(ratio), fmt(std::abs(s2 - ratio))}));
    }
    const EtaStar star = eta_star();
    CsvFile s(o.side_path("branches.csv"));
    s.line("alpha,label,eta,s2,stable");
    s.line(row({fmt(star.alpha), "eta_star", fmt(star.eta), fmt(s2_of_eta(star.eta)), "0"}));
    for (const auto& b : eta_branches(c.alpha).branches)
        s.line(row({fmt(c.alpha), b.label, fmt(b.eta), fmt(b.s2), b.stable ? "1" : "0"}));
}

void bingham_check(const RunConfig& c, Output& o) {
    const SphereGrid grid = build_grid(c.sphere_polar, c.sphere_azimuth);
    const BinghamEvaluator eval(grid);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> nd;
    auto random_unit = [&] {
        Vec3 v(nd(rng), nd(rng), nd(rng));
        return Vec3(v.normalized());
    };
    CsvFile csv(o.csv_path());
    csv.line("suite,case,value,reference,error");
    auto emit = [&](const std::string& suite, const std::string& name, double v, double ref) {
        csv.line(row({suite, name, fmt(v), fmt(ref), fmt(std::abs(v - ref))}));
    };
    for (double eta : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) emit("s2_identity", fmt(eta), s2_of_eta(eta), eta / alpha_of_eta(eta));
    for (double eta : {0.5, 2.0, 8.0, 20.0}) {
        const Mat3 q = eval.evaluate(BinghamParam::uniaxial(eta, Vec3::UnitZ())).q;
        emit("quadrature_s2", fmt(eta), 1.5 * q(2, 2), s2_of_eta(eta));
    }
    emit("isotropic", "log_z", eval.evaluate(BinghamParam()).log_z, std::log(kFourPi));
    emit("isotropic", "entropy", eval.evaluate(BinghamParam()).entropy, -std::log(kFourPi));
    const double eta = eta1(c.alpha);
    for (int k = 0; k < 10; ++k) {
        const Vec3 nu = random_unit();
        const Mat3 q = eval.evaluate(BinghamParam::uniaxial(eta, nu)).q;
        emit("uniaxial_moment", std::to_string(k), (q - uniaxial(eta / c.alpha, nu)).norm(), 0.0);
    }
    const HomogeneousMinimum hm = minimize_homogeneous(c.alpha, grid, 8, c.seed);
    emit("homogeneous_min", "uniaxiality_residual", uniaxiality_residual(hm.q), 0.0);
    emit("homogeneous_min", "s", director_extract(hm.q).s, eta / c.alpha);
    for (int k = 0; k < 10; ++k) {
        const Vec3 u = 3.0 * random_unit(), m = random_unit();
        const RotationalResiduals r = rotational_identity_check(u, m);
        emit("rotational_a", std::to_string(k), r.residual_a, 0.0);
        emit("rotational_b", std::to_string(k), r.residual_b, 0.0);
    }
    for (int k = 0; k < 5; ++k) {
        Mat3 a, b;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                a(i, j) = nd(rng);
                b(i, j) = nd(rng);
            }
        emit("integration_by_parts", std::to_string(k), integration_by_parts_residual(grid, symmetrize(a), symmetrize(b)).norm(),
             0.0);
    }
}

void kernel_check(const RunConfig& c, Output& o) {
    const KernelSpec spec = kernel(c);
    CsvFile csv(o.csv_path());
    csv.line("table,param,value,reference,error");
    auto emit = [&](const std::string& t, const std::string& p, double v, double ref) {
        csv.line(row({t, p, fmt(v), fmt(ref), fmt(std::abs(v - ref))}));
    };
    const int n = c.dimension == 2 ? 321 : 81;
    double gmin = 1.0, gmax = 0.0, margin = -1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < (c.dimension == 3 ? n : 1); ++l) {
                const Vec3 xi(-8.0 + 16.0 * i / (n - 1), -8.0 + 16.0 * j / (n - 1),
                              c.dimension == 3 ? -8.0 + 16.0 * l / (n - 1) : 0.0);
                const double x2 = xi.squaredNorm(), g = spec.ghat(x2);
                gmin = std::min(gmin, g);
                gmax = std::max(gmax, g);
                margin = std::max(margin, spec.c0() * x2 * g * g - spec.one_minus_ghat(x2));
            }
    emit("assump1", "ghat_min", gmin, 0.0);
    emit("assump1", "ghat_max", gmax, 1.0);
    emit("assump1", "max_c0_xi2_ghat2_minus_1_minus_ghat", margin, 0.0);
    emit("mu", "quadrature", mu_quadrature(spec, 1.0, c.dimension == 2 ? 0.05 : 0.1, 8.0), spec.mu());
    emit("symbol", "lipschitz_101", lipschitz_check(spec, 4.0, 101), lipschitz_check(spec, 4.0, 201));

    const LatticeBox lat(c.dimension, 1.0, 1.0 / 16, c.dimension == 2 ? 64 : 32, Domain{});
    std::mt19937_64 rng(c.seed);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const ScalarField u = band_limited(lat, rng, 12, 12);
        ScalarField diff = A_eps(lat, u, spec, eps, BoundaryMode::Periodic);
        const auto t = T_eps(lat, u, spec, eps);
        for (int k = 0; k < c.dimension; ++k) {
            const ComplexField tt = T_eps_component(lat, t[k], k, spec, eps);
            for (std::size_t i = 0; i < u.size(); ++i) diff[i] -= tt[i].real();
        }
        emit("factorization", fmt(eps), l2_norm(lat, diff) / l2_norm(lat, u), 0.0);
    }

    const LatticeBox big(c.dimension, 1.0, 1.0 / 32, c.dimension == 2 ? 256 : 64, Domain{});
    const double b = 4.0;
    ScalarField u(big.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-b * big.position(i).squaredNorm());
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const auto t = T_eps(big, u, spec, eps);
        std::vector<ComplexField> e(c.dimension, ComplexField(u.size()));
        for (int k = 0; k < c.dimension; ++k)
            for (std::size_t i = 0; i < u.size(); ++i)
                e[k][i] = t[k][i] + std::complex<double>(0.0, spec.limit_const()) * (-2.0 * b * big.position(i)(k) * u[i]);
        emit("t_limit", fmt(eps), l2_norm(big, e), 0.0);
    }
}

void operator_check(const RunConfig& c, Output& o) {
    const KernelSpec spec = kernel(c);
    const LatticeBox lat(c.dimension, 1.0, 1.0 / 16, c.dimension == 2 ? 128 : 32, Domain{});
    ScalarField phi(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) phi[i] = std::exp(-2.0 * lat.position(i).squaredNorm());
    std::mt19937_64 rng(c.seed);
    CsvFile csv(o.csv_path());
    csv.line("eps,sample,norm_ratio,limit_error");
    for (double eps : {1.0, 1e-2, 1e-4})
        for (int k = 0; k < 20; ++k) {
            const CommutatorDiag d = commutator_diag(lat, phi, band_limited(lat, rng, 8, 12), spec, eps);
            csv.line(row({fmt(eps), std::to_string(k), fmt(d.norm_ratio), fmt(d.limit_error)}));
        }
}

LatticeBox solver_lattice(const RunConfig& c, const KernelSpec& spec, double eps_max) {
    return make_lattice(c.dimension, c.lattice_r, c.lattice_n, Domain{}, spec.truncation_radius(eps_max));
}

SolverConfig solver_config(const RunConfig& c, double eps) {
    SolverConfig s;
    s.alpha = c.alpha;
    s.eps = eps;
    s.sigma = c.sigma;
    s.theta = c.theta;
    s.tol_q = c.tol_q;
    s.tol_el = c.tol_el;
    s.max_iter = c.max_iter;
    s.restarts = c.restarts;
    s.seed = c.seed;
    return s;
}

DirectorProfile profile_of(const RunConfig& c) {
    try {
        return named_profile(c.boundary_profile);
    } catch (const InvalidArgument& e) {
        throw ConfigError("boundary_profile", std::string("boundary_profile: ") + e.what());
    }
}

void check_solver(const RunConfig& c, const LatticeBox& lat, double eps) {
    try {
        solver_config(c, eps).validate(lat);
    } catch (const InvalidArgument& e) {
        const std::string w = e.what();
        throw ConfigError(w.rfind("alpha", 0) == 0 ? "alpha" : w.find("delta") != std::string::npos ? "eps_list" : "", w);
    }
}

void dump_state(const State& s, const std::string& path) {
    write_qfield_csv(path, s.q, QFieldMeta{s.eps, s.alpha, s.masks.delta}, s.masks.omega);
}

void minimize_cmd(const RunConfig& c, Output& o) {
    const KernelSpec spec = kernel(c);
    const double eps = c.eps_list.front();
    const LatticeBox lat = solver_lattice(c, spec, eps);
    check_solver(c, lat, eps);
    const BinghamEvaluator eval = evaluator(c);
    const auto bd = make_boundary(lat, profile_of(c), eta1(c.alpha), eval);
    const SolveResult res = minimize(solver_config(c, eps), bd, eval, spec);
    CsvFile csv(o.csv_path());
    csv.line(solver_csv_header());
    for (const auto& r : res.runs) csv.line(solver_csv_row(r));
    dump_state(res.state, o.side_path("qfield.csv"));
    check_admissible(res.state);
    if (!res.converged)
        throw NonConvergence("minimize: no start converged at eps=" + fmt(eps) + ", residual " + fmt(res.report().residual));
}

void eps_scan_cmd(const RunConfig& c, Output& o) {
    const KernelSpec spec = kernel(c);
    for (std::size_t k = 1; k < c.eps_list.size(); ++k)
        check(c.eps_list[k] < c.eps_list[k - 1], "eps_list", "must be strictly decreasing");
    const LatticeBox lat = solver_lattice(c, spec, c.eps_list.front());
    for (double eps : c.eps_list) check_solver(c, lat, eps);
    const BinghamEvaluator eval = evaluator(c);
    const DirectorProfile profile = profile_of(c);
    const auto bd = make_boundary(lat, profile, eta1(c.alpha), eval);
    const HeatFlowResult ref = harmonic_reference(lat, profile, c.hm_tol, c.hm_max_iter);
    const auto scan = eps_scan(solver_config(c, c.eps_list.front()), c.eps_list, bd, eval, spec, ref.n);
    CsvFile csv(o.csv_path());
    csv.line(solver_csv_header());
    for (const auto& s : scan)
        for (const auto& r : s.runs) csv.line(solver_csv_row(r));
    write_director_csv(o.side_path("reference.csv"), ref.n);
    for (std::size_t k = 0; k < scan.size(); ++k) {
        dump_state(scan[k].state, o.side_path("qfield_" + std::to_string(k) + ".csv"));
        check_admissible(scan[k].state);
    }
    for (const auto& s : scan)
        if (!s.converged) throw NonConvergence("eps-scan: no start converged at eps=" + fmt(s.state.eps));
}

void harmonic_map_cmd(const RunConfig& c, Output& o) {
    const LatticeBox lat = make_lattice(c.dimension, c.lattice_r, c.lattice_n, Domain{}, 0.0);
    const HeatFlowResult r = harmonic_reference(lat, profile_of(c), c.hm_tol, c.hm_max_iter);
    CsvFile csv(o.csv_path());
    csv.line("iterations,gradient,weak_residual,lattice_dirichlet_energy,dirichlet_energy,saddle_splay");
    csv.line(row({std::to_string(r.iterations), fmt(r.gradient), fmt(weak_residual(r.n, 2)),
                  fmt(lattice_dirichlet_energy(r.n)), fmt(dirichlet_energy(r.n)), fmt(saddle_splay_integral(r.n))}));
    write_director_csv(o.side_path("director.csv"), r.n);
}

const std::map<std::string, std::function<void(const RunConfig&, Output&)>>& dispatch() {
    static const std::map<std::string, std::function<void(const RunConfig&, Output&)>> table{
        {"phase-diagram", phase_diagram}, {"bingham-check", bingham_check}, {"kernel-check", kernel_check},
        {"operator-check", operator_check}, {"minimize", minimize_cmd},     {"eps-scan", eps_scan_cmd},
        {"harmonic-map", harmonic_map_cmd}};
    return table;
}

std::string kind_of(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const NonConvergence*>(&e)) return "non_convergence";
    if (dynamic_cast<const NoBracket*>(&e)) return "no_bracket";
    if (dynamic_cast<const QuadratureInsufficient*>(&e)) return "quadrature_insufficient";
    if (dynamic_cast<const InvariantViolation*>(&e)) return "invariant_violation";
    if (dynamic_cast<const DegenerateQ*>(&e)) return "degenerate_q";
    if (dynamic_cast<const LiftInconsistency*>(&e)) return "lift_inconsistency";
    if (dynamic_cast<const PaddingError*>(&e)) return "padding";
    if (dynamic_cast<const ZeroVector*>(&e)) return "zero_vector";
    return "internal";
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "alpha",        "eps_list",       "sigma",    "theta",     "tol_q",   "tol_el",    "max_iter",
        "restarts",     "lattice_n",      "lattice_r", "sphere_polar", "sphere_azimuth", "boundary_profile",
        "seed",         "command",        "out_dir",  "kernel_a",  "dimension", "eta_max", "eta_points",
        "hm_tol",       "hm_max_iter"};
    return keys;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"phase-diagram", "bingham-check", "kernel-check", "operator-check",
                                                "minimize",      "eps-scan",      "harmonic-map"};
    return names;
}

std::vector<std::string> required_keys(const std::string& command) {
    if (command == "minimize" || command == "eps-scan") return {"out_dir", "alpha", "eps_list", "lattice_n", "boundary_profile"};
    if (command == "harmonic-map") return {"out_dir", "lattice_n", "boundary_profile"};
    if (command == "bingham-check") return {"out_dir", "alpha"};
    return {"out_dir"};
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
            throw ConfigError(key, "unknown key '" + key + "' on line " + std::to_string(lineno));
        if (c.given.count(key)) throw ConfigError(key, "duplicate key '" + key + "'");
        if (val.empty()) throw ConfigError(key, key + ": empty value");
        c.given[key] = val;

        if (key == "alpha") c.alpha = to_double(key, val);
        else if (key == "eps_list") c.eps_list = to_list(key, val);
        else if (key == "sigma") c.sigma = to_double(key, val);
        else if (key == "theta") c.theta = to_double(key, val);
        else if (key == "tol_q") c.tol_q = to_double(key, val);
        else if (key == "tol_el") c.tol_el = to_double(key, val);
        else if (key == "max_iter") c.max_iter = to_int(key, val);
        else if (key == "restarts") c.restarts = to_int(key, val);
        else if (key == "lattice_n") c.lattice_n = to_int(key, val);
        else if (key == "lattice_r") c.lattice_r = to_double(key, val);
        else if (key == "sphere_polar") c.sphere_polar = to_int(key, val);
        else if (key == "sphere_azimuth") c.sphere_azimuth = to_int(key, val);
        else if (key == "boundary_profile") c.boundary_profile = val;
        else if (key == "seed") {
            const long long s = to_integer(key, val);
            check(s >= 0, key, "must be non-negative");
            c.seed = static_cast<std::uint64_t>(s);
        } else if (key == "command") c.command = val;
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "kernel_a") c.kernel_a = to_double(key, val);
        else if (key == "dimension") c.dimension = to_int(key, val);
        else if (key == "eta_max") c.eta_max = to_double(key, val);
        else if (key == "eta_points") c.eta_points = to_int(key, val);
        else if (key == "hm_tol") c.hm_tol = to_double(key, val);
        else if (key == "hm_max_iter") c.hm_max_iter = to_int(key, val);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("", "cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void RunConfig::validate() const {
    if (!command.empty())
        check(std::find(commands().begin(), commands().end(), command) != commands().end(), "command",
              "unknown command '" + command + "'");
    check(alpha > 0.0, "alpha", "must be positive");
    for (double e : eps_list) check(e > 0.0, "eps_list", "entries must be positive");
    check(sigma > 0.0 && sigma < 0.5, "sigma", "must lie in (0, 1/2)");
    check(theta > 0.0 && theta <= 1.0, "theta", "must lie in (0, 1]");
    check(tol_q > 0.0, "tol_q", "must be positive");
    check(tol_el > 0.0, "tol_el", "must be positive");
    check(max_iter >= 1, "max_iter", "must be at least 1");
    check(restarts >= 0, "restarts", "must be non-negative");
    check(lattice_n >= 4, "lattice_n", "must be at least 4");
    check(lattice_r > 0.0, "lattice_r", "must be positive");
    check(sphere_polar >= 2, "sphere_polar", "must be at least 2");
    check(sphere_azimuth >= 4, "sphere_azimuth", "must be at least 4");
    check(kernel_a > 0.0 && kernel_a < kPi, "kernel_a", "must lie in (0, pi)");
    check(dimension == 2 || dimension == 3, "dimension", "must be 2 or 3");
    check(eta_max > 0.0, "eta_max", "must be positive");
    check(eta_points >= 2, "eta_points", "must be at least 2");
    check(hm_tol > 0.0, "hm_tol", "must be positive");
    check(hm_max_iter >= 1, "hm_max_iter", "must be at least 1");
}

std::string RunConfig::manifest() const {
    std::string s;
    auto put = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    put("command", command);
    put("out_dir", out_dir);
    put("alpha", fmt(alpha));
    put("eps_list", join(eps_list));
    put("sigma", fmt(sigma));
    put("theta", fmt(theta));
    put("tol_q", fmt(tol_q));
    put("tol_el", fmt(tol_el));
    put("max_iter", std::to_string(max_iter));
    put("restarts", std::to_string(restarts));
    put("lattice_n", std::to_string(lattice_n));
    put("lattice_r", fmt(lattice_r));
    put("sphere_polar", std::to_string(sphere_polar));
    put("sphere_azimuth", std::to_string(sphere_azimuth));
    put("boundary_profile", boundary_profile);
    put("seed", std::to_string(seed));
    put("kernel_a", fmt(kernel_a));
    put("dimension", std::to_string(dimension));
    put("eta_max", fmt(eta_max));
    put("eta_points", std::to_string(eta_points));
    put("hm_tol", fmt(hm_tol));
    put("hm_max_iter", std::to_string(hm_max_iter));
    return s;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
    if (dynamic_cast<const NonConvergence*>(&e) || dynamic_cast<const NoBracket*>(&e) ||
        dynamic_cast<const QuadratureInsufficient*>(&e))
        return 3;
    return 4;
}

std::string error_line(const std::exception& e) {
    std::string msg = e.what();
    for (char& ch : msg)
        if (ch == '\n' || ch == '\r') ch = ' ';
    std::string quoted = "\"";
    for (char ch : msg) {
        if (ch == '"' || ch == '\\') quoted += '\\';
        quoted += ch;
    }
    quoted += '"';
    std::string out = "error code=" + std::to_string(exit_code_for(e)) + " kind=" + kind_of(e);
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && !ce->key().empty()) out += " key=" + ce->key();
    return out + " message=" + quoted;
}

int run(const std::string& command, const std::string& config_path, std::ostream& out, std::ostream& err) {
    try {
        RunConfig cfg = load_config(config_path);
        std::string cmd = command.empty() ? cfg.command : command;
        if (cmd.empty()) throw ConfigError("command", "no command given on the command line or in the config");
        if (!cfg.command.empty() && cfg.command != cmd)
            throw ConfigError("command", "config names command '" + cfg.command + "' but '" + cmd + "' was requested");
        cfg.command = cmd;
        cfg.validate();
        for (const auto& key : required_keys(cmd))
            if (!cfg.given.count(key)) throw ConfigError(key, "missing required key '" + key + "' for " + cmd);
        if (cmd == "minimize" || cmd == "eps-scan")
            check(cfg.alpha > 7.5, "alpha", "limit runs need alpha > 7.5");

        Output o(cfg, cmd);
        try {
            dispatch().at(cmd)(cfg, o);
        } catch (const Error&) {
            // a failed solve still leaves its CSV behind
            o.write_manifest(out);
            throw;
        }
        o.write_manifest(out);
        return 0;
    } catch (const std::exception& e) {
        err << error_line(e) << std::endl;
        return exit_code_for(e);
    }
}

}  // namespace onsager
