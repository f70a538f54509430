#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kgflow/normalform.hpp"
#include "kgflow/pipeline.hpp"

namespace {

using namespace kgflow;

struct Args {
    std::vector<std::string> positional;
    std::map<std::string, std::string> flags;
    bool has(const std::string& k) const { return flags.count(k) > 0; }
    std::string get(const std::string& k) const {
        auto it = flags.find(k);
        if (it == flags.end()) throw std::invalid_argument("missing required flag --" + k);
        return it->second;
    }
    std::string get_or(const std::string& k, const std::string& fb) const {
        auto it = flags.find(k);
        return it == flags.end() ? fb : it->second;
    }
};

Args parse_args(int argc, char** argv, int from) {
    Args a;
    for (int i = from; i < argc; ++i) {
        std::string tok = argv[i];
        if (tok.rfind("--", 0) == 0) {
            const std::string name = tok.substr(2);
            if (name == "strict" || name == "dry-run") {
                a.flags[name] = "1";
            } else if (i + 1 < argc) {
                a.flags[name] = argv[++i];
            } else {
                throw std::invalid_argument("flag --" + name + " needs a value");
            }
        } else {
            a.positional.push_back(tok);
        }
    }
    return a;
}

void usage() {
    std::cout <<
        "kgflow <command> [flags]\n"
        "\n"
        "commands:\n"
        "  resonance  --freq FILE [--max-order K] --out REPORT\n"
        "  normalform --hamiltonian FILE [--steps R] [--max-degree D] --out FILE\n"
        "  fgr        --operator FILE --pair L;R --couplings FILE --freq FILE [--width W] [--out FILE]\n"
        "  ode        --system FILE [--eps E] [--t-end T] [--rel-tol TOL] --out CSV [--strict]\n"
        "  kg         --config FILE --out CSV\n"
        "  pipeline   --config FILE [--out DIR] [--seed S] [--strict] [--dry-run]\n"
        "  report     --dir DIR [--out FILE]\n"
        "\n"
        "exit codes: 0 ok, 1 validation, 2 numerical failure, 3 bound failure (--strict)\n";
}

int cmd_resonance(const Args& a) {
    const FrequencySpec freq = load_frequency_file(a.get("freq"));
    const int max_order =
        a.has("max-order") ? std::stoi(a.get("max-order")) : default_max_order(freq);
    const AssumptionReport assumptions = check_assumptions(freq, max_order);
    const auto lambda = enumerate_lambda(freq, max_order);
    const auto star = minimal_set(lambda);
    const auto structure = verify_lambda_star_structure(star);
    const Exponents expo = compute_exponents(freq, lambda);

    std::ostringstream os;
    os << "== resonance report ==\n" << frequency_to_text(freq) << "max_order = " << max_order
       << '\n' << assumptions.summary() << '\n';
    os << "|Lambda| = " << lambda.size() << ", |Lambda*| = " << star.size() << '\n';
    os << "N =";
    for (int N : expo.N) os << ' ' << N;
    os << "\nalpha =";
    for (double al : expo.alpha) os << ' ' << format_double(al);
    os << "\nkappa = " << format_double(expo.kappa) << "\nj0 = " << expo.j0 + 1 << '\n';
    os << "structure: " << (structure.ok() ? "lemma checks pass" : "VIOLATIONS") << '\n';
    for (const auto& [p, why] : structure.violations) os << "  " << p.str() << ": " << why << '\n';
    for (const auto& [p, j] : structure.bad_resonances)
        os << "bad resonance " << p.str() << " in mode " << j + 1 << '\n';

    atomic_write(a.get("out"), os.str());
    atomic_write(a.get("out") + ".pairs", pair_list_to_text(lambda, star, freq));
    std::cout << os.str();
    return assumptions.all_ok() ? kExitOk : kExitValidation;
}

int cmd_normalform(const Args& a) {
    const SparsePolynomial H = load_polynomial(a.get("hamiltonian"));
    const int steps = std::stoi(a.get_or("steps", "1"));
    const int max_degree = std::stoi(a.get_or("max-degree", "-1"));
    const NormalFormResult nf = birkhoff(H, steps, max_degree);
    atomic_write(a.get("out"), polynomial_to_text(nf.Z0));
    atomic_write(a.get("out") + ".remainder", polynomial_to_text(nf.remainder));
    std::cout << "normal form to order " << nf.achieved_order << ": |Z0| = " << nf.Z0.size()
              << " terms, remainder min degree "
              << (nf.remainder.empty() ? 0 : nf.remainder.min_degree()) << ", "
              << nf.small_divisors.size() << " small divisors\n";
    return kExitOk;
}

int cmd_fgr(const Args& a) {
    const auto [op, m] = load_operator(a.get("operator"));
    const CouplingMap couplings = load_couplings(a.get("couplings"));
    const std::string pair_arg = a.get("pair");
    const auto semi = pair_arg.find(';');
    if (semi == std::string::npos)
        throw std::invalid_argument("--pair expects 'l1,l2,..;r1,r2,..'");
    const ResonancePair pair =
        parse_pair_token("lambda=" + pair_arg.substr(0, semi) + ";rho=" + pair_arg.substr(semi + 1));

    FrequencySpec freq = load_frequency_file(a.get("freq"));
    if (std::abs(freq.m - m) > 1e-12)
        throw std::invalid_argument("fgr: mass mismatch between --freq and --operator");
    const double width = std::stod(a.get_or("width", "-1"));
    const ResonanceMatrices R = build_matrices(pair, couplings, op, freq, width);
    const FgrVerdict v = check_fgr(R.T_im);
    const std::string text = matrices_to_text(R);
    if (a.has("out")) atomic_write(a.get("out"), text);
    std::cout << text << "fgr: " << (v.definite ? "definite" : "semidefinite-degenerate")
              << " (min eigenvalue " << format_double(v.min_eigenvalue) << ")\n";
    return kExitOk;
}

int cmd_ode(const Args& a) {
    OdeSystem sys = load_system(a.get("system"));
    const double eps = std::stod(a.get_or("eps", format_double(sys.pert.eps)));
    sys.pert.eps = eps;
    const double t_end = std::stod(a.get_or("t-end", "1e12"));
    const double rel_tol = std::stod(a.get_or("rel-tol", "1e-9"));

    Vector X0(sys.n());
    for (int j = 0; j < sys.n(); ++j)
        X0[j] = std::pow(eps, 2.0 * sys.expo.alpha[static_cast<size_t>(j)]);

    const ModeTrajectory traj = integrate(sys, X0, t_end, rel_tol);
    const BoundReport bounds = verify_theorem_bounds(traj, sys, eps);
    {
        std::ostringstream csv;
        write_trajectory_csv(csv, traj, sys, eps);
        atomic_write(a.get("out"), csv.str());
    }
    atomic_write(a.get("out") + ".bounds.txt", bounds.summary());
    std::cout << bounds.summary();
    if (a.has("strict") && !bounds.all_pass()) return kExitBounds;
    return kExitOk;
}

int cmd_kg(const Args& a) {
    const ConfigFile cfg = ConfigFile::load(a.get("config"));
    const std::string sec = cfg.has("kg", "M") ? "kg" : "";
    KgConfig kc;
    kc.grid.half_length = cfg.get_double_or(sec, "L", 40.0);
    kc.grid.points = static_cast<int>(cfg.get_int_or(sec, "M", 1024));
    kc.potential = {cfg.get_double_or(sec, "V0", 2.0), cfg.get_double_or(sec, "a", 1.0)};
    kc.mass = cfg.get_double_or(sec, "mass", 1.3);
    kc.lambda_nl = cfg.get_double_or(sec, "lambda", 1.0);
    kc.t_end = cfg.get_double_or(sec, "t_end", 100.0);
    kc.dt = cfg.get_double_or(sec, "dt", 0.0);
    kc.absorber = cfg.get_bool_or(sec, "absorber", true);
    kc.absorber_strength = cfg.get_double_or(sec, "absorber_strength", 1.0);
    kc.absorber_fraction = cfg.get_double_or(sec, "absorber_fraction", 0.15);
    kc.continuum_seed = cfg.get_double_or(sec, "continuum_seed", 0.0);
    if (cfg.has(sec, "amplitudes"))
        kc.mode_amplitudes = cfg.get_doubles(sec, "amplitudes");

    const SpectralDecomposition spec = discretize(kc.potential, kc.grid, kc.mass);
    std::ofstream csv(a.get("out"));
    if (!csv) throw std::invalid_argument("cannot write " + a.get("out"));
    const KgRunSummary run = run_experiment(kc, spec, &csv);
    std::cout << "bound states: " << spec.n_bound() << ", dt = " << run.dt_used
              << ", steps = " << run.steps << "\n|xi| " << run.xi_abs.front().maxCoeff() << " -> "
              << run.xi_abs.back().maxCoeff()
              << ", energy drift (pre-absorber) = " << run.energy_drift_pre_absorber << '\n';
    return kExitOk;
}

int cmd_pipeline(const Args& a) {
    ExperimentConfig cfg = ExperimentConfig::load(a.get("config"));
    if (a.has("out")) cfg.out_dir = a.get("out");
    if (a.has("seed")) cfg.seed = std::stoul(a.get("seed"));
    cfg.strict = a.has("strict");
    cfg.dry_run = a.has("dry-run");
    const int rc = run_pipeline(cfg);
    if (rc == kExitOk && !cfg.dry_run)
        std::cout << "pipeline ok, artifacts in " << cfg.out_dir << '\n';
    return rc;
}

int cmd_report(const Args& a) {
    const std::string text = emit_report(a.get("dir"));
    if (a.has("out"))
        atomic_write(a.get("out"), text);
    else
        std::cout << text;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage();
        return kgflow::kExitValidation;
    }
    const std::string cmd = argv[1];
    try {
        const Args args = parse_args(argc, argv, 2);
        if (cmd == "resonance") return cmd_resonance(args);
        if (cmd == "normalform") return cmd_normalform(args);
        if (cmd == "fgr") return cmd_fgr(args);
        if (cmd == "ode") return cmd_ode(args);
        if (cmd == "kg") return cmd_kg(args);
        if (cmd == "pipeline") return cmd_pipeline(args);
        if (cmd == "report") return cmd_report(args);
        if (cmd == "help" || cmd == "--help" || cmd == "-h") {
            usage();
            return kgflow::kExitOk;
        }
        std::cerr << "unknown command '" << cmd << "'\n";
        usage();
        return kgflow::kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kgflow::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kgflow::kExitNumerical;
    }
}
