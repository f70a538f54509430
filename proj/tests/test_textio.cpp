#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kgflow/pipeline.hpp"
#include "kgflow/textio.hpp"

using namespace kgflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("kgflow_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("config parsing: sections, comments, lists") {
    std::istringstream in(
        "top = 1\n"
        "[frequency]\n"
        "m = 1.0          # mass\n"
        "omegas = 0.45 0.25\n"
        "multiplicities = 1 1\n"
        "[ode]\n"
        "enabled = true\n"
        "eps = 0.1 0.03\n");
    const auto cfg = ConfigFile::parse(in);
    CHECK(cfg.get_double("", "top") == 1.0);
    CHECK(cfg.get_double("frequency", "m") == 1.0);
    CHECK(cfg.get_doubles("frequency", "omegas") == std::vector<double>{0.45, 0.25});
    CHECK(cfg.get_bool_or("ode", "enabled", false));
    CHECK(cfg.get_int_or("ode", "missing", 7) == 7);
    CHECK_THROWS(cfg.get("ode", "missing"));
    std::istringstream bad("key without equals\n");
    CHECK_THROWS(ConfigFile::parse(bad));
}

TEST_CASE("frequency file round trip") {
    TempDir tmp;
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    f.multiplicities = {2, 1};
    atomic_write(tmp.file("freq.txt"), frequency_to_text(f));
    const auto g = load_frequency_file(tmp.file("freq.txt"));
    CHECK(g.m == f.m);
    CHECK(g.omegas == f.omegas);
    CHECK(g.multiplicities == f.multiplicities);
}

TEST_CASE("pair list format carries membership and bad modes") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.32, 0.21};
    const auto lambda = enumerate_lambda(f, 5);
    const auto star = minimal_set(lambda);
    const std::string text = pair_list_to_text(lambda, star, f);
    CHECK(text.find("lambda=4,0;rho=0,1;") != std::string::npos);
    CHECK(text.find("minimal=1") != std::string::npos);
    CHECK(text.find("bad_modes=[2]") != std::string::npos);
    // every line must parse back
    std::istringstream is(text);
    std::string line;
    size_t parsed = 0;
    while (std::getline(is, line)) {
        (void)parse_pair_token(line);
        ++parsed;
    }
    CHECK(parsed == lambda.size());
}

TEST_CASE("polynomial file round trip preserves terms exactly") {
    SparsePolynomial p(std::vector<double>{0.45, 0.25});
    p.add_term({{2, 0}, {0, 1}}, {1.0 / 3.0, -0.125});
    p.add_term({{0, 1}, {2, 0}}, {1.0 / 3.0, 0.125});
    const std::string text = polynomial_to_text(p);
    std::istringstream is(text);
    const auto q = parse_polynomial(is);
    CHECK(q.context() == p.context());
    CHECK((q - p).max_abs_coeff() == 0.0);
}

TEST_CASE("operator and couplings round trip") {
    TempDir tmp;
    const auto op = uniform_continuum(1.0, 2.0, 6, 6);
    atomic_write(tmp.file("op.txt"), operator_to_text(op, 1.0));
    const auto [op2, m] = load_operator(tmp.file("op.txt"));
    CHECK(m == 1.0);
    CHECK(op2.eigenvalues == op.eigenvalues);
    CHECK((op2.eigenvectors - op.eigenvectors).cwiseAbs().maxCoeff() == 0.0);

    CouplingMap cm;
    CVector v(3);
    v << Complex{0.1, -0.2}, Complex{0.0, 1.0 / 3.0}, Complex{2.0, 0.0};
    cm[{MultiIndex{0, 0}, MultiIndex{2, 1}}] = v;
    atomic_write(tmp.file("cpl.txt"), couplings_to_text(cm));
    const auto cm2 = load_couplings(tmp.file("cpl.txt"));
    REQUIRE(cm2.size() == 1);
    CHECK((cm2.begin()->second - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("system file round trip") {
    TempDir tmp;
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.32, 0.21};
    const auto lambda = enumerate_lambda(f, 5);
    const auto star = minimal_set(lambda);
    std::vector<double> c(star.size(), 1.0);
    c[0] = 1.75;
    auto sys = OdeSystem::make(f, star, lambda, c);
    sys.C0 = 12.0;
    sys.pert.eps = 0.03;
    sys.pert.p_prefactor = 0.3;
    atomic_write(tmp.file("sys.txt"), system_to_text(sys));

    const auto sys2 = load_system(tmp.file("sys.txt"));
    CHECK(sys2.freq.omegas == f.omegas);
    CHECK(sys2.lambda_star == sys.lambda_star);
    CHECK(sys2.lambda_full.size() == sys.lambda_full.size());
    CHECK(sys2.coefficients == sys.coefficients);
    CHECK(sys2.C0 == 12.0);
    CHECK(sys2.pert.eps == 0.03);
    CHECK(sys2.pert.p_prefactor == 0.3);
    CHECK(sys2.expo.kappa == sys.expo.kappa);
}

TEST_CASE("trajectory CSV has the documented columns") {
    FrequencySpec f;
    f.m = 1.0;
    f.omegas = {0.45, 0.25};
    const auto sys = OdeSystem::make(
        f, {{{3, 0}, {0, 0}}, {{2, 1}, {0, 0}}, {{1, 4}, {0, 0}}, {{0, 5}, {0, 0}}});
    Vector X0(2);
    X0 << 1e-4, 1e-4;
    const auto traj = integrate(sys, X0, 1e4, 1e-8, 40);
    std::ostringstream os;
    write_trajectory_csv(os, traj, sys, 0.01);
    std::istringstream back(os.str());
    std::string header;
    std::getline(back, header);
    CHECK(header == "t,X_1,X_2,Xt_1,Xt_2,Xh_1,Xh_2,Y,W,accumulator");
}

TEST_CASE("17 significant digits survive the round trip") {
    const double v = 0.1234567890123456789;
    CHECK(std::stod(format_double(v)) == v);
    CHECK(std::stod(format_double(1e-300)) == 1e-300);
}
