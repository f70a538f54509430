#include "kgflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kgflow/normalform.hpp"

namespace kgflow {

namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    ExperimentConfig cfg;
    cfg.raw = ConfigFile::load(path);
    cfg.name = cfg.raw.get_or("experiment", "name", fs::path(path).stem().string());
    cfg.seed = static_cast<unsigned long>(cfg.raw.get_int_or("experiment", "seed", 42));
    cfg.out_dir = cfg.raw.get_or("experiment", "out", "out/" + cfg.name);
    return cfg;
}

CouplingMap synthetic_couplings(const std::vector<SlotPair>& basis, int dim, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    CouplingMap map;
    for (const auto& key : basis) {
        CVector v(dim);
        for (int i = 0; i < dim; ++i) {
            // Gaussian envelope over the level index keeps the profiles
            // concentrated but overlapping, so shell traces stay independent.
            const double center = 0.35 + 0.3 * gauss(rng) * 0.1;
            const double x = (static_cast<double>(i) / dim - center) / 0.18;
            const double env = std::exp(-0.5 * x * x);
            v[i] = Complex{gauss(rng), gauss(rng)} * env;
        }
        map[key] = v;
    }
    return map;
}

std::vector<double> synthetic_overlaps(int slots, std::mt19937& rng) {
    const size_t L = static_cast<size_t>(slots);
    std::vector<double> I(L * L * L * L, 0.0);
    std::uniform_real_distribution<double> uni(0.2, 1.0);
    auto at = [&](size_t a, size_t b, size_t c, size_t d) -> double& {
        return I[((a * L + b) * L + c) * L + d];
    };
    // draw one value per sorted index quadruple, then symmetrize
    for (size_t a = 0; a < L; ++a)
        for (size_t b = a; b < L; ++b)
            for (size_t c = b; c < L; ++c)
                for (size_t d = c; d < L; ++d) {
                    const double val = uni(rng);
                    size_t idx[4] = {a, b, c, d};
                    std::sort(idx, idx + 4);
                    do {
                        at(idx[0], idx[1], idx[2], idx[3]) = val;
                    } while (std::next_permutation(idx, idx + 4));
                    at(a, b, c, d) = val;
                }
    return I;
}

namespace {

struct StageData {
    FrequencySpec freq;
    AssumptionReport assumptions;
    std::vector<ResonancePair> lambda;
    std::vector<ResonancePair> lambda_star;
    Exponents expo;
    int max_order = 0;
    std::vector<double> fgr_c;  // per lambda_star entry, empty unless fgr ran
};

std::string bool_word(bool b) { return b ? "yes" : "no"; }

void write_artifact(const std::string& dir, const std::string& file, const std::string& body) {
    atomic_write((fs::path(dir) / file).string(), body);
}

// ---- frequency + assumption stage ----

int stage_frequency(const ExperimentConfig& cfg, StageData& d, std::ostream& log) {
    const bool have_freq = cfg.raw.has("frequency", "omegas") || cfg.raw.has("", "omegas");
    const bool have_kg = cfg.raw.get_bool_or("kg", "enabled", false) ||
                         cfg.raw.has("kg", "V0");
    if (have_freq) {
        d.freq = load_frequency_spec(cfg.raw);
    } else if (have_kg) {
        Grid grid;
        grid.half_length = cfg.raw.get_double_or("kg", "L", 40.0);
        grid.points = static_cast<int>(cfg.raw.get_int_or("kg", "M", 1024));
        PoschlTeller pot{cfg.raw.get_double_or("kg", "V0", 2.0),
                         cfg.raw.get_double_or("kg", "a", 1.0)};
        const double mass = cfg.raw.get_double_or("kg", "mass", 1.3);
        const SpectralDecomposition spec = discretize(pot, grid, mass);
        if (spec.n_bound() == 0) {
            log << "frequency: potential has no bound states\n";
            return kExitValidation;
        }
        d.freq = spec.frequency_spec();
    } else {
        log << "frequency: need [frequency] omegas or [kg] potential\n";
        return kExitValidation;
    }

    d.max_order = static_cast<int>(
        cfg.raw.get_int_or("resonance", "max_order", default_max_order(d.freq)));
    d.assumptions = check_assumptions(d.freq, d.max_order);
    write_artifact(cfg.out_dir, "frequency.txt", frequency_to_text(d.freq));
    write_artifact(cfg.out_dir, "assumptions.txt", d.assumptions.summary() + "\n");
    if (!d.assumptions.all_ok()) {
        log << "frequency: assumption checks failed\n" << d.assumptions.summary() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

// ---- resonance stage ----

int stage_resonance(const ExperimentConfig& cfg, StageData& d, std::ostream& log) {
    d.lambda = enumerate_lambda(d.freq, d.max_order);
    d.lambda_star = minimal_set(d.lambda);
    d.expo = compute_exponents(d.freq, d.lambda);
    const StructureReport structure = verify_lambda_star_structure(d.lambda_star);

    write_artifact(cfg.out_dir, "pairs.txt", pair_list_to_text(d.lambda, d.lambda_star, d.freq));

    std::ostringstream os;
    os << "max_order = " << d.max_order << '\n'
       << "lambda_size = " << d.lambda.size() << '\n'
       << "lambda_star_size = " << d.lambda_star.size() << '\n';
    os << "N =";
    for (int N : d.expo.N) os << ' ' << N;
    os << "\nalpha =";
    for (double a : d.expo.alpha) os << ' ' << format_double(a);
    os << "\nkappa = " << format_double(d.expo.kappa) << "\nj0 = " << d.expo.j0 + 1 << '\n';
    os << "structure_ok = " << bool_word(structure.ok()) << '\n';
    for (const auto& [p, why] : structure.violations)
        os << "violation " << p.str() << " : " << why << '\n';
    for (const auto& [p, j] : structure.bad_resonances)
        os << "bad_resonance " << p.str() << " mode " << j + 1 << '\n';
    write_artifact(cfg.out_dir, "resonance.txt", os.str());

    if (!structure.ok()) {
        log << "resonance: minimal-set structure violated\n";
        return kExitNumerical;
    }
    return kExitOk;
}

// ---- normal form stage ----

int stage_normalform(const ExperimentConfig& cfg, StageData& d, std::mt19937& rng,
                     std::ostream& log) {
    if (!cfg.raw.get_bool_or("normalform", "enabled", true)) return kExitOk;
    const int steps = static_cast<int>(cfg.raw.get_int_or("normalform", "steps", 1));
    const int L = d.freq.total_slots();
    if (L > 4) {
        write_artifact(cfg.out_dir, "normalform.txt",
                       "skipped = true\nreason = more than 4 slots\n");
        return kExitOk;
    }
    const auto overlaps = synthetic_overlaps(L, rng);
    const SparsePolynomial quartic = build_quartic_hamiltonian(overlaps, d.freq);
    const NormalFormResult nf = birkhoff(quartic, steps);
    const Pseudo1dReport p1d = check_pseudo_1d(nf.Z0, d.freq);

    write_artifact(cfg.out_dir, "z0.txt", polynomial_to_text(nf.Z0));
    std::ostringstream os;
    os << "steps = " << steps << '\n'
       << "achieved_order = " << nf.achieved_order << '\n'
       << "remainder_min_degree = "
       << (nf.remainder.empty() ? 0 : nf.remainder.min_degree()) << '\n'
       << "z0_real = " << bool_word(nf.Z0.is_real()) << '\n'
       << "pseudo_1d = " << bool_word(p1d.ok) << '\n'
       << "small_divisors = " << nf.small_divisors.size() << '\n';
    write_artifact(cfg.out_dir, "normalform.txt", os.str());
    if (!p1d.ok) {
        log << "normalform: " << p1d.summary() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

// ---- fgr stage ----

int stage_fgr(const ExperimentConfig& cfg, StageData& d, std::mt19937& rng, std::ostream& log) {
    if (!cfg.raw.get_bool_or("fgr", "enabled", true)) return kExitOk;
    const int levels = static_cast<int>(cfg.raw.get_int_or("fgr", "levels", 240));
    const double span_factor = cfg.raw.get_double_or("fgr", "span_factor", 0.0);
    double span = 0.0;
    for (const auto& p : d.lambda_star) span = std::max(span, omega_dot(p, d.freq) - d.freq.m);
    span = span_factor > 0.0 ? span_factor * d.freq.m : 1.5 * span + 0.5 * d.freq.m;
    const ContinuumOperator op = uniform_continuum(d.freq.m, span, levels, levels);
    const double width = cfg.raw.get_double_or("fgr", "width", -1.0);

    std::ostringstream os;
    os << "levels = " << levels << "\nspan = " << format_double(span) << '\n';
    d.fgr_c.clear();
    int idx = 0;
    for (const auto& p : d.lambda_star) {
        const auto basis = expand_pair_basis(p, d.freq);
        const CouplingMap couplings = synthetic_couplings(basis, op.dim(), rng);
        const ResonanceMatrices R = build_matrices(p, couplings, op, d.freq, width);
        const FgrVerdict verdict = check_fgr(R.T_im);

        // reference monomial vector at equidistributed slot actions
        CVector gamma(static_cast<Eigen::Index>(R.basis.size()));
        const auto slot_modes = d.freq.slot_modes();
        double x_power = 1.0;
        {
            const double X_ref = 0.01;
            std::vector<double> slot_amp(slot_modes.size());
            for (size_t a = 0; a < slot_modes.size(); ++a)
                slot_amp[a] = std::sqrt(2.0 * X_ref / d.freq.multiplicity(slot_modes[a]));
            for (size_t i = 0; i < R.basis.size(); ++i) {
                double v = 1.0;
                const auto& [mu, nu] = R.basis[i];
                for (size_t a = 0; a < slot_amp.size(); ++a)
                    v *= std::pow(slot_amp[a], mu[a] + nu[a]);
                gamma[static_cast<Eigen::Index>(i)] = v;
            }
            for (int e = 0; e < p.order(); ++e) x_power *= X_ref;
        }
        const double c = c_lambda_rho(gamma, R.T_im, x_power);
        d.fgr_c.push_back(c);

        write_artifact(cfg.out_dir, "matrices_" + std::to_string(idx) + ".txt",
                       matrices_to_text(R));
        os << "pair " << p.str() << " dim=" << R.basis.size() << " shell_energy="
           << format_double(R.shell_energy) << " width=" << format_double(R.width)
           << " min_eig=" << format_double(verdict.min_eigenvalue) << " fgr="
           << (verdict.definite ? "definite" : "degenerate") << " c=" << format_double(c)
           << '\n';
        if (!verdict.definite)
            log << "fgr: degenerate matrix for pair " << p.str() << " (reported)\n";
        ++idx;
    }
    write_artifact(cfg.out_dir, "fgr.txt", os.str());
    return kExitOk;
}

// ---- ode stage ----

struct OdeStageOutcome {
    bool bounds_ok = true;
};

int stage_ode(const ExperimentConfig& cfg, StageData& d, std::mt19937& rng,
              OdeStageOutcome& outcome, std::ostream& log) {
    if (!cfg.raw.get_bool_or("ode", "enabled", true)) return kExitOk;

    std::vector<double> eps_list{0.1, 0.03, 0.01};
    if (cfg.raw.has("ode", "eps")) eps_list = cfg.raw.get_doubles("ode", "eps");
    const double t_end = cfg.raw.get_double_or("ode", "t_end", 1e12);
    const double rel_tol = cfg.raw.get_double_or("ode", "rel_tol", 1e-9);
    const std::string model = cfg.raw.get_or("ode", "coefficient_model", "unit");

    std::vector<double> coeffs(d.lambda_star.size(), 1.0);
    if (model == "random") {
        std::uniform_real_distribution<double> uni(0.5, 2.0);
        for (auto& c : coeffs) c = uni(rng);
    } else if (model == "fgr") {
        if (d.fgr_c.empty()) {
            log << "ode: coefficient_model=fgr requires the fgr stage\n";
            return kExitValidation;
        }
        double logmean = 0.0;
        for (double c : d.fgr_c) logmean += std::log(std::max(c, 1e-300));
        logmean = std::exp(logmean / static_cast<double>(d.fgr_c.size()));
        for (size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = d.fgr_c[i] / logmean;
    } else if (model != "unit") {
        log << "ode: unknown coefficient_model '" << model << "'\n";
        return kExitValidation;
    }
    // explicit per-pair overrides: key "c(lambda=..;rho=..)" in [ode]
    for (const auto& [key, value] : cfg.raw.section_map("ode")) {
        if (key.rfind("c(", 0) != 0) continue;
        const ResonancePair p = parse_pair_token(key.substr(2, key.size() - 3));
        const auto it = std::find(d.lambda_star.begin(), d.lambda_star.end(), p);
        if (it == d.lambda_star.end()) {
            log << "ode: coefficient override for " << p.str() << " not in minimal set\n";
            return kExitValidation;
        }
        coeffs[static_cast<size_t>(it - d.lambda_star.begin())] = std::stod(value);
    }

    OdeSystem sys = OdeSystem::make(d.freq, d.lambda_star, d.lambda, coeffs);
    sys.C0 = cfg.raw.get_double_or("ode", "C0", 10.0);
    sys.pert.p_prefactor = cfg.raw.get_double_or("ode", "p_prefactor", 0.0);
    sys.pert.r_prefactor = cfg.raw.get_double_or("ode", "r_prefactor", 0.0);

    std::vector<double> x0_scale(static_cast<size_t>(sys.n()), 1.0);
    if (cfg.raw.has("ode", "x0_scale")) {
        const auto s = cfg.raw.get_doubles("ode", "x0_scale");
        if (s.size() != x0_scale.size()) {
            log << "ode: x0_scale arity mismatch\n";
            return kExitValidation;
        }
        x0_scale = s;
    }

    std::ostringstream os;
    os << "t_end = " << format_double(t_end) << "\ncoefficient_model = " << model << "\nc =";
    for (double c : coeffs) os << ' ' << format_double(c);
    os << '\n';

    for (double eps : eps_list) {
        sys.pert.eps = eps;
        Vector X0(sys.n());
        for (int j = 0; j < sys.n(); ++j)
            X0[j] = x0_scale[static_cast<size_t>(j)] *
                    std::pow(eps, 2.0 * sys.expo.alpha[static_cast<size_t>(j)]);

        const ModeTrajectory traj = integrate(sys, X0, t_end, rel_tol);
        const ModeTrajectory hat = integrate_hat(sys, to_tilde(X0, d.freq), t_end, rel_tol);
        const BoundReport bounds = verify_theorem_bounds(traj, sys, eps);
        outcome.bounds_ok = outcome.bounds_ok && bounds.all_pass();

        const std::string tag = "eps" + format_double(eps);
        {
            std::ostringstream csv;
            write_trajectory_csv(csv, traj, sys, eps);
            write_artifact(cfg.out_dir, "ode_" + tag + ".csv", csv.str());
        }
        write_artifact(cfg.out_dir, "bounds_" + tag + ".txt", bounds.summary());

        os << "[eps " << format_double(eps) << "]\n";
        for (int j = 0; j < sys.n(); ++j) {
            double slope = 0.0;
            try {
                slope = fit_decay_exponent(traj.times, traj.component(j), t_end / 100.0, t_end);
            } catch (const std::exception&) {
                slope = std::nan("");
            }
            os << "slope_X" << j + 1 << " = " << format_double(slope) << '\n';
        }
        {
            std::vector<double> norm;
            norm.reserve(traj.times.size());
            for (const auto& x : traj.X) norm.push_back(x.maxCoeff());
            double slope = std::nan("");
            try {
                slope = fit_decay_exponent(traj.times, norm, t_end / 100.0, t_end);
            } catch (const std::exception&) {
            }
            os << "slope_norm = " << format_double(slope) << '\n';
        }
        os << "x_transient_increase = " << bool_word(traj.x_increase_events > 0) << '\n';
        for (int j = 0; j < sys.n(); ++j)
            os << "max_growth_X" << j + 1 << " = " << format_double(traj.max_growth(j)) << '\n';
        os << "hat_monotone_derived = " << bool_word(traj.hat_increase_events == 0) << '\n'
           << "hat_monotone_autonomous = " << bool_word(hat.hat_increase_events == 0) << '\n'
           << "accumulator = " << format_double(traj.accumulator.back()) << '\n'
           << "accumulator_le_10eps = " << bool_word(traj.accumulator.back() <= 10.0 * eps)
           << '\n'
           << "bounds_ok = " << bool_word(bounds.all_pass()) << '\n';
    }
    write_artifact(cfg.out_dir, "ode.txt", os.str());
    return kExitOk;
}

// ---- kg stage ----

int stage_kg(const ExperimentConfig& cfg, StageData& d, std::ostream& log) {
    if (!cfg.raw.get_bool_or("kg", "enabled", false)) return kExitOk;
    (void)d;
    KgConfig kc;
    kc.grid.half_length = cfg.raw.get_double_or("kg", "L", 16.0);
    kc.grid.points = static_cast<int>(cfg.raw.get_int_or("kg", "M", 128));
    kc.potential = {cfg.raw.get_double_or("kg", "V0", 2.0), cfg.raw.get_double_or("kg", "a", 1.0)};
    kc.mass = cfg.raw.get_double_or("kg", "mass", 1.3);
    kc.lambda_nl = cfg.raw.get_double_or("kg", "lambda", 1.0);
    kc.t_end = cfg.raw.get_double_or("kg", "t_end", 100.0);
    kc.dt = cfg.raw.get_double_or("kg", "dt", 0.0);
    kc.absorber = cfg.raw.get_bool_or("kg", "absorber", true);
    kc.continuum_seed = cfg.raw.get_double_or("kg", "continuum_seed", 0.0);
    if (cfg.raw.has("kg", "amplitudes"))
        kc.mode_amplitudes = cfg.raw.get_doubles("kg", "amplitudes");
    else
        kc.mode_amplitudes = {0.5};

    try {
        const SpectralDecomposition spec = discretize(kc.potential, kc.grid, kc.mass);
        std::ostringstream csv;
        const KgRunSummary run = run_experiment(kc, spec, &csv);
        write_artifact(cfg.out_dir, "kg.csv", csv.str());

        std::ostringstream os;
        os << "bound_states = " << spec.n_bound() << "\nomegas =";
        for (double w : spec.bound_frequencies()) os << ' ' << format_double(w);
        os << "\ndt = " << format_double(run.dt_used) << "\nsteps = " << run.steps << '\n';
        const double xi0 = run.xi_abs.front().maxCoeff();
        const double xiT = run.xi_abs.back().maxCoeff();
        os << "xi_initial = " << format_double(xi0) << "\nxi_final = " << format_double(xiT)
           << "\nxi_ratio = " << format_double(xiT / xi0) << "\nenergy_drift_pre_absorber = "
           << format_double(run.energy_drift_pre_absorber) << '\n';
        write_artifact(cfg.out_dir, "kg.txt", os.str());
    } catch (const std::exception& e) {
        log << "kg: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int run_pipeline(const ExperimentConfig& cfg) {
    std::ostream& log = std::cerr;
    if (cfg.dry_run) {
        std::cout << "plan: experiment '" << cfg.name << "' seed " << cfg.seed << " -> "
                  << cfg.out_dir << '\n';
        std::cout << "stages: frequency, resonance";
        if (cfg.raw.get_bool_or("normalform", "enabled", true)) std::cout << ", normalform";
        if (cfg.raw.get_bool_or("fgr", "enabled", true)) std::cout << ", fgr";
        if (cfg.raw.get_bool_or("ode", "enabled", true)) std::cout << ", ode";
        if (cfg.raw.get_bool_or("kg", "enabled", false)) std::cout << ", kg";
        std::cout << ", report\n";
        return kExitOk;
    }
    fs::create_directories(cfg.out_dir);
    std::mt19937 rng(static_cast<unsigned long>(cfg.seed));
    StageData data;
    OdeStageOutcome ode_outcome;

    struct Stage {
        const char* name;
        std::function<int()> fn;
    };
    const std::vector<Stage> stages{
        {"frequency", [&] { return stage_frequency(cfg, data, log); }},
        {"resonance", [&] { return stage_resonance(cfg, data, log); }},
        {"normalform", [&] { return stage_normalform(cfg, data, rng, log); }},
        {"fgr", [&] { return stage_fgr(cfg, data, rng, log); }},
        {"ode", [&] { return stage_ode(cfg, data, rng, ode_outcome, log); }},
        {"kg", [&] { return stage_kg(cfg, data, log); }},
    };
    for (const auto& stage : stages) {
        int rc;
        try {
            rc = stage.fn();
        } catch (const std::invalid_argument& e) {
            log << stage.name << ": " << e.what() << '\n';
            return kExitValidation;
        } catch (const std::exception& e) {
            log << stage.name << ": " << e.what() << '\n';
            return kExitNumerical;
        }
        if (rc != kExitOk) {
            log << "pipeline halted at stage '" << stage.name << "'\n";
            return rc;
        }
    }
    write_artifact(cfg.out_dir, "summary.txt", emit_report(cfg.out_dir));
    if (cfg.strict && !ode_outcome.bounds_ok) return kExitBounds;
    return kExitOk;
}

std::string emit_report(const std::string& artifact_dir) {
    const std::vector<std::pair<std::string, bool>> parts{
        {"frequency.txt", true}, {"assumptions.txt", true}, {"resonance.txt", true},
        {"normalform.txt", false}, {"fgr.txt", false}, {"ode.txt", false}, {"kg.txt", false}};
    std::vector<std::string> missing;
    std::ostringstream os;
    os << "== experiment summary ==\n";
    for (const auto& [file, required] : parts) {
        const fs::path p = fs::path(artifact_dir) / file;
        if (!fs::exists(p)) {
            if (required) missing.push_back(file);
            continue;
        }
        os << "\n-- " << file << " --\n" << read_file(p.string());
    }
    if (!missing.empty()) {
        std::string what = "emit_report: missing stage artifacts:";
        for (const auto& f : missing) what += ' ' + f;
        throw std::invalid_argument(what);
    }

    // headline cross-checks mirrored from the stage artifacts
    const ConfigFile ode = fs::exists(fs::path(artifact_dir) / "ode.txt")
                               ? ConfigFile::load((fs::path(artifact_dir) / "ode.txt").string())
                               : ConfigFile{};
    os << "\n-- verdicts --\n";
    for (const auto& section : ode.sections()) {
        if (section.rfind("eps ", 0) != 0) continue;
        os << "eps=" << section.substr(4) << ": Xhat monotone: "
           << ode.get_or(section, "hat_monotone_derived", "n/a")
           << ", accumulator <= 10 eps: " << ode.get_or(section, "accumulator_le_10eps", "n/a")
           << ", bounds: " << ode.get_or(section, "bounds_ok", "n/a") << '\n';
    }
    return os.str();
}

}  // namespace kgflow
