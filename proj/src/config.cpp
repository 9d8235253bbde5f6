#include "aoipomdp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aoipomdp/policy_io.hpp"

namespace aoipomdp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawValue {
    std::string text;
    int line = 0;
};

// section -> key -> value, with strict duplicate detection.
struct RawConfig {
    std::map<std::string, std::map<std::string, RawValue>> sections;
    std::vector<std::pair<std::string, std::string>> channel_order;
};

RawConfig read_raw(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    RawConfig raw;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name", lineno);
            raw.sections[section];  // a section may be empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno);
        if (section.empty())
            throw ConfigError("key outside of any section", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        if (value.empty()) throw ConfigError("empty value", lineno, key);
        auto [it, inserted] =
            raw.sections[section].emplace(key, RawValue{value, lineno});
        if (!inserted)
            throw ConfigError("duplicate key", lineno, section + "." + key);
        if (section == "channels") raw.channel_order.emplace_back(key, value);
    }
    return raw;
}

double parse_double(const RawValue& v, const std::string& key) {
    const std::string& s = v.text;
    double out = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("expected a number, got '" + s + "'", v.line, key);
    return out;
}

long long parse_int(const RawValue& v, const std::string& key) {
    const std::string& s = v.text;
    long long out = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("expected an integer, got '" + s + "'", v.line, key);
    return out;
}

std::uint64_t parse_u64(const RawValue& v, const std::string& key) {
    const std::string& s = v.text;
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("expected an unsigned integer, got '" + s + "'",
                          v.line, key);
    return out;
}

// Matrix literal: rows separated by ';', entries by whitespace,
// e.g. [0.95 0.05; 0.1 0.9]. A single row is a row vector.
Eigen::MatrixXd parse_matrix(const RawValue& v, const std::string& key) {
    const std::string& s = v.text;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError("expected a matrix literal [ ... ]", v.line, key);
    std::vector<std::vector<double>> rows;
    std::stringstream body(s.substr(1, s.size() - 2));
    std::string row_text;
    while (std::getline(body, row_text, ';')) {
        std::istringstream rs(row_text);
        std::vector<double> row;
        std::string tok;
        while (rs >> tok) {
            double x = 0.0;
            const auto [p, ec] =
                std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || p != tok.data() + tok.size())
                throw ConfigError("malformed matrix entry '" + tok + "'",
                                  v.line, key);
            row.push_back(x);
        }
        if (row.empty())
            throw ConfigError("empty matrix row", v.line, key);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty matrix literal", v.line, key);
    const size_t cols = rows.front().size();
    for (const auto& row : rows)
        if (row.size() != cols)
            throw ConfigError("ragged matrix rows", v.line, key);
    Eigen::MatrixXd M(rows.size(), cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols; ++j) M(i, j) = rows[i][j];
    return M;
}

// Vector: a 1 x k or k x 1 matrix literal.
Eigen::VectorXd parse_vector(const RawValue& v, const std::string& key) {
    Eigen::MatrixXd M = parse_matrix(v, key);
    if (M.rows() == 1) return M.row(0).transpose();
    if (M.cols() == 1) return M.col(0);
    throw ConfigError("expected a vector, got a " + std::to_string(M.rows()) +
                          "x" + std::to_string(M.cols()) + " matrix",
                      v.line, key);
}

// Scalar broadcast or per-state vector for the energy entries.
Eigen::VectorXd parse_energy(const RawValue& v, const std::string& key,
                             int n_states) {
    Eigen::VectorXd e;
    if (!v.text.empty() && v.text.front() == '[') {
        e = parse_vector(v, key);
        if (e.size() != n_states)
            throw ConfigError("energy vector needs one entry per channel state",
                              v.line, key);
    } else {
        e = Eigen::VectorXd::Constant(n_states, parse_double(v, key));
    }
    for (Eigen::Index i = 0; i < e.size(); ++i)
        if (e[i] < 0.0)
            throw ConfigError("energy must be nonnegative", v.line, key);
    return e;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

class SectionReader {
public:
    SectionReader(const RawConfig& raw, const std::string& name,
                  bool required) {
        auto it = raw.sections.find(name);
        if (it == raw.sections.end()) {
            if (required) throw ConfigError("missing section [" + name + "]");
            section_ = nullptr;
        } else {
            section_ = &it->second;
        }
        name_ = name;
    }

    bool present() const { return section_ != nullptr; }

    const RawValue& require(const std::string& key) {
        const RawValue* v = find(key);
        if (!v)
            throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
        return *v;
    }

    const RawValue* find(const std::string& key) {
        if (!section_) return nullptr;
        used_.insert(key);
        auto it = section_->find(key);
        return it == section_->end() ? nullptr : &it->second;
    }

    // Call after all known keys were touched.
    void reject_unknown() const {
        if (!section_) return;
        for (const auto& [key, value] : *section_)
            if (!used_.count(key))
                throw ConfigError("unknown key '" + key + "' in [" + name_ + "]",
                                  value.line, key);
    }

private:
    const std::map<std::string, RawValue>* section_;
    std::string name_;
    std::set<std::string> used_;
};

void append_matrix(std::string& out, const char* tag,
                   const Eigen::MatrixXd& M) {
    out += tag;
    out += ' ' + std::to_string(M.rows()) + ' ' + std::to_string(M.cols());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            out += ' ' + format_double(M(i, j));
    out += '\n';
}

}  // namespace

LtiModel ExperimentConfig::make_lti() const {
    return LtiModel(A, C, R_w, R_v, Sigma0);
}

ChannelModel ExperimentConfig::make_channel() const {
    return ChannelModel(Tc, q, lambda, n_r);
}

ChannelModel ExperimentConfig::make_channel_named(
    const std::string& name, double lambda_override) const {
    if (name == "channel")
        return ChannelModel(Tc, q, lambda_override, n_r);
    for (const auto& [key, matrix] : channels)
        if (key == name) return ChannelModel(matrix, q, lambda_override, n_r);
    throw ConfigError("unknown channel '" + name + "' (not in [channels])");
}

Eigen::MatrixXd ExperimentConfig::energy_table() const {
    Eigen::MatrixXd table(energy_fresh.size(), 2);
    table.col(static_cast<int>(Action::fresh)) = energy_fresh;
    table.col(static_cast<int>(Action::retransmit)) = energy_retransmit;
    return table;
}

std::uint64_t ExperimentConfig::model_hash() const {
    std::string canon;
    append_matrix(canon, "A", A);
    append_matrix(canon, "C", C);
    append_matrix(canon, "R_w", R_w);
    append_matrix(canon, "R_v", R_v);
    append_matrix(canon, "Sigma0", Sigma0);
    append_matrix(canon, "x_hat0", x_hat0);
    append_matrix(canon, "P0", P0);
    append_matrix(canon, "Tc", Tc);
    append_matrix(canon, "q", q);
    canon += "lambda " + format_double(lambda) + "\n";
    canon += "n_r " + std::to_string(n_r) + "\n";
    append_matrix(canon, "energy_fresh", energy_fresh);
    append_matrix(canon, "energy_retransmit", energy_retransmit);
    canon += std::string("terminal ") +
             (terminal == TerminalMode::stage_trace ? "stage" : "zero") + "\n";
    canon += "horizon " + std::to_string(horizon) + "\n";
    canon += "resolution " + std::to_string(resolution) + "\n";
    return fnv1a64(canon);
}

ExperimentConfig load_config(const std::string& path) {
    const RawConfig raw = read_raw(path);
    for (const auto& [name, keys] : raw.sections) {
        static const std::set<std::string> kKnown = {
            "system", "channel", "channels", "cost",
            "solver", "simulation", "output"};
        if (!kKnown.count(name))
            throw ConfigError("unknown section [" + name + "]");
    }

    ExperimentConfig cfg;

    SectionReader system(raw, "system", true);
    cfg.A = parse_matrix(system.require("A"), "A");
    cfg.C = parse_matrix(system.require("C"), "C");
    cfg.R_w = parse_matrix(system.require("R_w"), "R_w");
    cfg.R_v = parse_matrix(system.require("R_v"), "R_v");
    cfg.Sigma0 = parse_matrix(system.require("Sigma0"), "Sigma0");
    if (const RawValue* v = system.find("x_hat0"))
        cfg.x_hat0 = parse_vector(*v, "x_hat0");
    else
        cfg.x_hat0 = Eigen::VectorXd::Zero(cfg.A.rows());
    if (const RawValue* v = system.find("P0"))
        cfg.P0 = parse_matrix(*v, "P0");
    else
        cfg.P0 = cfg.Sigma0;
    system.reject_unknown();

    SectionReader channel(raw, "channel", true);
    cfg.Tc = parse_matrix(channel.require("Tc"), "Tc");
    cfg.q = parse_vector(channel.require("q"), "q");
    cfg.lambda = parse_double(channel.require("lambda"), "lambda");
    cfg.n_r = static_cast<int>(parse_int(channel.require("n_r"), "n_r"));
    channel.reject_unknown();

    if (raw.sections.count("channels")) {
        const auto& sec = raw.sections.at("channels");
        for (const auto& [name, text] : raw.channel_order) {
            Eigen::MatrixXd M = parse_matrix(sec.at(name), name);
            if (M.rows() != cfg.Tc.rows() || M.cols() != cfg.Tc.cols())
                throw ConfigError("channel matrix shape mismatch",
                                  sec.at(name).line, name);
            cfg.channels.emplace_back(name, std::move(M));
        }
    }

    SectionReader cost(raw, "cost", true);
    const int n_states = static_cast<int>(cfg.Tc.rows());
    cfg.energy_fresh =
        parse_energy(cost.require("energy_fresh"), "energy_fresh", n_states);
    cfg.energy_retransmit = parse_energy(cost.require("energy_retransmit"),
                                         "energy_retransmit", n_states);
    if (const RawValue* v = cost.find("terminal")) {
        if (v->text == "stage")
            cfg.terminal = TerminalMode::stage_trace;
        else if (v->text == "zero")
            cfg.terminal = TerminalMode::zero;
        else
            throw ConfigError("terminal must be 'stage' or 'zero'", v->line,
                              "terminal");
    }
    cost.reject_unknown();

    SectionReader solver(raw, "solver", true);
    cfg.horizon =
        static_cast<int>(parse_int(solver.require("horizon"), "horizon"));
    cfg.resolution = static_cast<int>(
        parse_int(solver.require("resolution"), "resolution"));
    solver.reject_unknown();

    SectionReader simulation(raw, "simulation", true);
    cfg.runs = static_cast<int>(parse_int(simulation.require("runs"), "runs"));
    cfg.seed = parse_u64(simulation.require("seed"), "seed");
    if (const RawValue* v = simulation.find("burn_in"))
        cfg.burn_in = static_cast<int>(parse_int(*v, "burn_in"));
    simulation.reject_unknown();

    SectionReader output(raw, "output", false);
    if (output.present()) {
        if (const RawValue* v = output.find("dir")) cfg.out_dir = v->text;
        if (const RawValue* v = output.find("formats")) {
            cfg.formats = split_list(v->text);
            for (const std::string& f : cfg.formats)
                if (f != "csv" && f != "svg")
                    throw ConfigError("unknown output format '" + f + "'",
                                      v->line, "formats");
        }
        output.reject_unknown();
    }

    // Cross-field validation with the line-free constructors; errors are
    // rewrapped so the CLI exit code stays in the configuration class.
    try {
        const LtiModel lti = cfg.make_lti();
        const ChannelModel ch = cfg.make_channel();
        (void)lti;
        (void)ch;
        for (const auto& [name, matrix] : cfg.channels)
            (void)ChannelModel(matrix, cfg.q, cfg.lambda, cfg.n_r);
        (void)CostModel(std::vector<double>(cfg.n_r + 1, 0.0),
                        cfg.energy_table(),
                        std::vector<double>(cfg.n_r + 1, 0.0));
        if (cfg.x_hat0.size() != cfg.A.rows())
            throw std::invalid_argument("x_hat0 dimension mismatch");
        if (cfg.P0.rows() != cfg.A.rows() || cfg.P0.cols() != cfg.A.rows())
            throw std::invalid_argument("P0 dimension mismatch");
        require_symmetric_psd("P0", cfg.P0);
        if (cfg.horizon < 1)
            throw std::invalid_argument("horizon must be >= 1");
        if (cfg.resolution < 1)
            throw std::invalid_argument("resolution must be >= 1");
        if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
        if (cfg.burn_in < 0 || cfg.burn_in >= cfg.horizon)
            throw std::invalid_argument("burn_in must lie in [0, horizon)");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

}  // namespace aoipomdp
