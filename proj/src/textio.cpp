#include "kgflow/textio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgflow {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

MultiIndex parse_csv_ints(const std::string& s) {
    MultiIndex v;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!trim(cur).empty()) v.push_back(std::stoi(trim(cur)));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return v;
}

// parses "[1 0 2]" or "[1,0,2]"
MultiIndex parse_bracket_ints(const std::string& s) {
    std::string body = trim(s);
    if (!body.empty() && body.front() == '[') body = body.substr(1);
    if (!body.empty() && body.back() == ']') body.pop_back();
    for (char& c : body)
        if (c == ',') c = ' ';
    MultiIndex v;
    std::istringstream is(body);
    int x;
    while (is >> x) v.push_back(x);
    return v;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
    ConfigFile cfg;
    std::string line, section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got '" + line + "'");
        cfg.data_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse(in);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::invalid_argument("config: missing key '" + key + "' in [" + section + "]");
    return data_.at(section).at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    return std::stod(get(section, key));
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    return has(section, key) ? std::stod(get(section, key)) : fallback;
}

long ConfigFile::get_int_or(const std::string& section, const std::string& key,
                            long fallback) const {
    return has(section, key) ? std::stol(get(section, key)) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: bad boolean '" + v + "' for " + key);
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split_ws(get(section, key))) out.push_back(std::stod(tok));
    return out;
}

std::vector<std::string> ConfigFile::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : data_) out.push_back(name);
    return out;
}

const std::map<std::string, std::string>& ConfigFile::section_map(
    const std::string& section) const {
    static const std::map<std::string, std::string> empty;
    auto it = data_.find(section);
    return it == data_.end() ? empty : it->second;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

FrequencySpec load_frequency_spec(const ConfigFile& cfg) {
    const std::string sec = cfg.has("frequency", "omegas") ? "frequency" : "";
    FrequencySpec f;
    f.m = cfg.get_double(sec, "m");
    f.omegas = cfg.get_doubles(sec, "omegas");
    if (cfg.has(sec, "multiplicities")) {
        for (double v : cfg.get_doubles(sec, "multiplicities"))
            f.multiplicities.push_back(static_cast<int>(v));
    }
    f.validate();
    return f;
}

FrequencySpec load_frequency_file(const std::string& path) {
    return load_frequency_spec(ConfigFile::load(path));
}

std::string frequency_to_text(const FrequencySpec& freq) {
    std::ostringstream os;
    os << "m = " << format_double(freq.m) << "\nomegas =";
    for (double w : freq.omegas) os << ' ' << format_double(w);
    os << "\nmultiplicities =";
    for (int j = 0; j < freq.n_modes(); ++j) os << ' ' << freq.multiplicity(j);
    os << '\n';
    return os.str();
}

namespace {
std::string csv_ints(const MultiIndex& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}
}  // namespace

std::string pair_list_to_text(const std::vector<ResonancePair>& lambda,
                              const std::vector<ResonancePair>& minimal,
                              const FrequencySpec& freq) {
    std::ostringstream os;
    for (const auto& p : lambda) {
        const bool is_min = std::find(minimal.begin(), minimal.end(), p) != minimal.end();
        os << "lambda=" << csv_ints(p.lambda) << ";rho=" << csv_ints(p.rho)
           << ";dot=" << format_double(omega_dot(p, freq)) << ";minimal=" << (is_min ? 1 : 0)
           << ";bad_modes=[";
        bool first = true;
        for (size_t j = 0; j < p.lambda.size(); ++j)
            if (p.lambda[j] - p.rho[j] < 0) {
                if (!first) os << ',';
                os << j + 1;
                first = false;
            }
        os << "]\n";
    }
    return os.str();
}

ResonancePair parse_pair_token(const std::string& token) {
    ResonancePair p;
    std::istringstream is(token);
    std::string field;
    while (std::getline(is, field, ';')) {
        field = trim(field);
        if (field.rfind("lambda=", 0) == 0) p.lambda = parse_csv_ints(field.substr(7));
        else if (field.rfind("rho=", 0) == 0) p.rho = parse_csv_ints(field.substr(4));
    }
    if (p.lambda.empty() || p.lambda.size() != p.rho.size())
        throw std::invalid_argument("bad pair token '" + token + "'");
    return p;
}

std::string polynomial_to_text(const SparsePolynomial& p) {
    std::ostringstream os;
    os << "omegas =";
    for (double w : p.context()) os << ' ' << format_double(w);
    os << '\n';
    for (const auto& [k, c] : p.terms()) {
        os << "mu=[";
        for (size_t a = 0; a < k.mu.size(); ++a) os << (a ? " " : "") << k.mu[a];
        os << "] nu=[";
        for (size_t a = 0; a < k.nu.size(); ++a) os << (a ? " " : "") << k.nu[a];
        os << "] re=" << format_double(c.real()) << " im=" << format_double(c.imag()) << '\n';
    }
    return os.str();
}

SparsePolynomial parse_polynomial(std::istream& in) {
    std::string line;
    std::vector<double> context;
    SparsePolynomial p;
    bool have_context = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("omegas", 0) == 0) {
            const auto eq = line.find('=');
            for (const auto& tok : split_ws(line.substr(eq + 1))) context.push_back(std::stod(tok));
            p = SparsePolynomial(context);
            have_context = true;
            continue;
        }
        if (!have_context) throw std::invalid_argument("polynomial: missing omegas line");
        const auto mu_open = line.find("mu=[");
        const auto mu_close = line.find(']', mu_open);
        const auto nu_open = line.find("nu=[", mu_close);
        const auto nu_close = line.find(']', nu_open);
        const auto re_pos = line.find("re=", nu_close);
        const auto im_pos = line.find("im=", re_pos);
        if (mu_open == std::string::npos || nu_open == std::string::npos ||
            re_pos == std::string::npos || im_pos == std::string::npos)
            throw std::invalid_argument("polynomial: bad line '" + line + "'");
        MonomialKey key;
        key.mu = parse_bracket_ints(line.substr(mu_open + 3, mu_close - mu_open - 2));
        key.nu = parse_bracket_ints(line.substr(nu_open + 3, nu_close - nu_open - 2));
        const double re = std::stod(line.substr(re_pos + 3));
        const double im = std::stod(line.substr(im_pos + 3));
        if (key.mu.size() != context.size() || key.nu.size() != context.size())
            throw std::invalid_argument("polynomial: exponent arity mismatch");
        p.add_term(key, {re, im});
    }
    if (!have_context) throw std::invalid_argument("polynomial: empty file");
    return p;
}

SparsePolynomial load_polynomial(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return parse_polynomial(in);
}

std::string operator_to_text(const ContinuumOperator& op, double m) {
    std::ostringstream os;
    os << "m = " << format_double(m) << "\ndim = " << op.dim() << "\nlevels = " << op.modes()
       << "\neigenvalues =";
    for (double e : op.eigenvalues) os << ' ' << format_double(e);
    os << "\nweights =";
    for (double w : op.weights) os << ' ' << format_double(w);
    os << '\n';
    for (int k = 0; k < op.modes(); ++k) {
        os << "vec " << k << " =";
        for (int i = 0; i < op.dim(); ++i) os << ' ' << format_double(op.eigenvectors(i, k));
        os << '\n';
    }
    return os.str();
}

std::pair<ContinuumOperator, double> load_operator(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::string line;
    ContinuumOperator op;
    double m = 0.0;
    int dim = 0, levels = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "m") m = std::stod(val);
        else if (key == "dim") dim = std::stoi(val);
        else if (key == "levels") {
            levels = std::stoi(val);
            op.eigenvectors = Eigen::MatrixXd::Zero(dim, levels);
        } else if (key == "eigenvalues") {
            for (const auto& tok : split_ws(val)) op.eigenvalues.push_back(std::stod(tok));
        } else if (key == "weights") {
            for (const auto& tok : split_ws(val)) op.weights.push_back(std::stod(tok));
        } else if (key.rfind("vec ", 0) == 0) {
            const int k = std::stoi(key.substr(4));
            const auto toks = split_ws(val);
            if (static_cast<int>(toks.size()) != dim)
                throw std::invalid_argument("operator: bad eigenvector row length");
            for (int i = 0; i < dim; ++i) op.eigenvectors(i, k) = std::stod(toks[static_cast<size_t>(i)]);
        }
    }
    if (dim == 0 || levels == 0) throw std::invalid_argument("operator: missing dim/levels");
    op.validate(m);
    return {op, m};
}

std::string couplings_to_text(const CouplingMap& map) {
    std::ostringstream os;
    for (const auto& [key, vec] : map) {
        os << "coupling mu=[";
        for (size_t a = 0; a < key.first.size(); ++a) os << (a ? " " : "") << key.first[a];
        os << "] nu=[";
        for (size_t a = 0; a < key.second.size(); ++a) os << (a ? " " : "") << key.second[a];
        os << "] re=[";
        for (int i = 0; i < vec.size(); ++i) os << (i ? " " : "") << format_double(vec[i].real());
        os << "] im=[";
        for (int i = 0; i < vec.size(); ++i) os << (i ? " " : "") << format_double(vec[i].imag());
        os << "]\n";
    }
    return os.str();
}

CouplingMap load_couplings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    CouplingMap map;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("coupling", 0) != 0)
            throw std::invalid_argument("couplings: bad line '" + line + "'");
        auto grab = [&](const std::string& tag) {
            const auto pos = line.find(tag + "=[");
            const auto close = line.find(']', pos);
            if (pos == std::string::npos || close == std::string::npos)
                throw std::invalid_argument("couplings: missing " + tag);
            return line.substr(pos + tag.size() + 1, close - pos - tag.size());
        };
        const auto mu = parse_bracket_ints(grab("mu"));
        const auto nu = parse_bracket_ints(grab("nu"));
        std::vector<double> re, im;
        for (const auto& tok : split_ws(grab("re").substr(1))) re.push_back(std::stod(tok));
        for (const auto& tok : split_ws(grab("im").substr(1))) im.push_back(std::stod(tok));
        if (re.size() != im.size()) throw std::invalid_argument("couplings: re/im length mismatch");
        CVector v(static_cast<Eigen::Index>(re.size()));
        for (size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = {re[i], im[i]};
        map[{mu, nu}] = v;
    }
    return map;
}

std::string matrices_to_text(const ResonanceMatrices& R) {
    std::ostringstream os;
    os << "shell_energy = " << format_double(R.shell_energy) << "\nwidth = "
       << format_double(R.width) << "\ndim = " << R.T_re.rows() << "\nbasis =";
    for (const auto& [mu, nu] : R.basis) {
        os << " mu[";
        for (size_t a = 0; a < mu.size(); ++a) os << (a ? " " : "") << mu[a];
        os << "]nu[";
        for (size_t a = 0; a < nu.size(); ++a) os << (a ? " " : "") << nu[a];
        os << "]";
    }
    os << '\n';
    auto grid = [&](const char* name, const CMatrix& M, bool imag) {
        os << name << " =\n";
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c)
                os << (c ? " " : "  ")
                   << format_double(imag ? M(r, c).imag() : M(r, c).real());
            os << '\n';
        }
    };
    grid("T_re.re", R.T_re, false);
    grid("T_re.im", R.T_re, true);
    grid("T_im.re", R.T_im, false);
    grid("T_im.im", R.T_im, true);
    return os.str();
}

std::string system_to_text(const OdeSystem& sys) {
    std::ostringstream os;
    os << frequency_to_text(sys.freq);
    os << "C0 = " << format_double(sys.C0) << '\n';
    os << "eps = " << format_double(sys.pert.eps) << '\n';
    os << "p_prefactor = " << format_double(sys.pert.p_prefactor) << '\n';
    os << "r_prefactor = " << format_double(sys.pert.r_prefactor) << '\n';
    for (size_t i = 0; i < sys.lambda_star.size(); ++i) {
        const auto& p = sys.lambda_star[i];
        os << "pair lambda=" << csv_ints(p.lambda) << ";rho=" << csv_ints(p.rho)
           << ";c=" << format_double(sys.coefficients[i]) << '\n';
    }
    for (const auto& p : sys.lambda_full) {
        if (std::find(sys.lambda_star.begin(), sys.lambda_star.end(), p) != sys.lambda_star.end())
            continue;
        os << "full lambda=" << csv_ints(p.lambda) << ";rho=" << csv_ints(p.rho) << '\n';
    }
    return os.str();
}

OdeSystem load_system(const std::string& path) {
    const ConfigFile cfg = ConfigFile::load(path);
    // the pair lines are not key=value; re-scan manually
    FrequencySpec freq;
    freq.m = cfg.get_double("", "m");
    freq.omegas = cfg.get_doubles("", "omegas");
    if (cfg.has("", "multiplicities"))
        for (double v : cfg.get_doubles("", "multiplicities"))
            freq.multiplicities.push_back(static_cast<int>(v));
    freq.validate();

    std::vector<ResonancePair> star, extra;
    std::vector<double> coeffs;
    std::istringstream is(read_file(path));
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.rfind("pair ", 0) == 0) {
            const std::string body = line.substr(5);
            star.push_back(parse_pair_token(body));
            const auto cpos = body.find(";c=");
            coeffs.push_back(cpos == std::string::npos ? 1.0 : std::stod(body.substr(cpos + 3)));
        } else if (line.rfind("full ", 0) == 0) {
            extra.push_back(parse_pair_token(line.substr(5)));
        }
    }
    if (star.empty()) throw std::invalid_argument("system: no resonance pairs");
    std::vector<ResonancePair> full = star;
    full.insert(full.end(), extra.begin(), extra.end());
    OdeSystem sys = OdeSystem::make(freq, star, full, coeffs);
    sys.C0 = cfg.get_double_or("", "C0", 10.0);
    sys.pert.eps = cfg.get_double_or("", "eps", 0.1);
    sys.pert.p_prefactor = cfg.get_double_or("", "p_prefactor", 0.0);
    sys.pert.r_prefactor = cfg.get_double_or("", "r_prefactor", 0.0);
    return sys;
}

void write_trajectory_csv(std::ostream& os, const ModeTrajectory& traj, const OdeSystem& sys,
                          double eps) {
    const int n = sys.n();
    os << "t";
    for (int j = 1; j <= n; ++j) os << ",X_" << j;
    for (int j = 1; j <= n; ++j) os << ",Xt_" << j;
    for (int j = 1; j <= n; ++j) os << ",Xh_" << j;
    os << ",Y,W,accumulator\n";
    for (size_t k = 0; k < traj.times.size(); ++k) {
        os << format_double(traj.times[k]);
        for (int j = 0; j < n; ++j) os << ',' << format_double(traj.X[k][j]);
        for (int j = 0; j < n; ++j) os << ',' << format_double(traj.X_tilde[k][j]);
        for (int j = 0; j < n; ++j) os << ',' << format_double(traj.X_hat[k][j]);
        os << ',' << format_double(comparison_Y(traj.times[k], eps, sys.expo.N.back())) << ','
           << format_double(comparison_W(traj.times[k], eps, sys.expo.kappa)) << ','
           << format_double(traj.accumulator[k]) << '\n';
    }
}

}  // namespace kgflow
