#include "aoipomdp/policy_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aoipomdp {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

void write_header(std::ostream& os, const char* kind,
                  const ArtifactHeader& h) {
    os << "format " << kind << " 1\n";
    os << "n_c " << h.n_c << "\n";
    os << "n_r " << h.n_r << "\n";
    os << "horizon " << h.horizon << "\n";
    os << "resolution " << h.resolution << "\n";
    os << "model_hash " << hash_hex(h.model_hash) << "\n";
}

// Reads "key value" lines in fixed order; throws on any deviation.
class HeaderReader {
public:
    explicit HeaderReader(std::istream& is) : is_(is) {}

    std::string expect(const std::string& key) {
        std::string line;
        if (!std::getline(is_, line))
            throw std::runtime_error("truncated artifact header");
        std::istringstream ss(line);
        std::string k, v;
        if (!(ss >> k >> v) || k != key)
            throw std::runtime_error("corrupt artifact header at '" + line +
                                     "', expected key '" + key + "'");
        return v;
    }

    long expect_int(const std::string& key) { return std::stol(expect(key)); }

private:
    std::istream& is_;
};

ArtifactHeader parse_header(std::istream& is, const char* kind) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("empty artifact file");
    {
        std::istringstream ss(line);
        std::string word, k;
        int version = 0;
        if (!(ss >> word >> k >> version) || word != "format")
            throw std::runtime_error("missing artifact format line");
        if (k != kind)
            throw std::runtime_error("artifact is a '" + k + "', expected '" +
                                     std::string(kind) + "'");
        if (version != 1)
            throw std::runtime_error("unsupported artifact version " +
                                     std::to_string(version));
    }
    HeaderReader r(is);
    ArtifactHeader h;
    h.n_c = static_cast<int>(r.expect_int("n_c"));
    h.n_r = static_cast<int>(r.expect_int("n_r"));
    h.horizon = static_cast<int>(r.expect_int("horizon"));
    h.resolution = static_cast<int>(r.expect_int("resolution"));
    h.model_hash = std::stoull(r.expect("model_hash"), nullptr, 16);
    return h;
}

size_t parse_count(std::istream& is) {
    HeaderReader r(is);
    const long n = r.expect_int("data");
    if (n < 0) throw std::runtime_error("negative artifact data count");
    return static_cast<size_t>(n);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return is;
}

}  // namespace

void save_policy(const std::string& path, const ArtifactHeader& header,
                 const Policy& policy) {
    std::ofstream os = open_out(path);
    write_header(os, "aoi-pomdp-policy", header);
    os << "data " << policy.actions.size() << "\n";
    for (size_t i = 0; i < policy.actions.size(); ++i) {
        os << static_cast<int>(policy.actions[i]);
        os << ((i % 32 == 31 || i + 1 == policy.actions.size()) ? '\n' : ' ');
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

Policy load_policy(const std::string& path, ArtifactHeader* header_out) {
    std::ifstream is = open_in(path);
    const ArtifactHeader h = parse_header(is, "aoi-pomdp-policy");
    const size_t count = parse_count(is);
    const size_t expected = static_cast<size_t>(h.horizon) *
                            BeliefGrid::point_count(h.n_c, h.resolution) *
                            (h.n_r + 1);
    if (count != expected)
        throw std::runtime_error("policy data count does not match header");
    Policy policy(h.horizon,
                  static_cast<int>(BeliefGrid::point_count(h.n_c, h.resolution)),
                  h.n_r + 1);
    for (size_t i = 0; i < count; ++i) {
        int a = 0;
        if (!(is >> a) || (a != 0 && a != 1))
            throw std::runtime_error("corrupt policy data at entry " +
                                     std::to_string(i));
        policy.actions[i] = static_cast<Action>(a);
    }
    if (header_out) *header_out = h;
    return policy;
}

void save_values(const std::string& path, const ArtifactHeader& header,
                 const ValueTable& table) {
    std::ofstream os = open_out(path);
    write_header(os, "aoi-pomdp-values", header);
    os << "data " << table.values.size() << "\n";
    for (size_t i = 0; i < table.values.size(); ++i) {
        os << format_double(table.values[i]);
        os << ((i % 8 == 7 || i + 1 == table.values.size()) ? '\n' : ' ');
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

ValueTable load_values(const std::string& path, ArtifactHeader* header_out) {
    std::ifstream is = open_in(path);
    const ArtifactHeader h = parse_header(is, "aoi-pomdp-values");
    const size_t count = parse_count(is);
    const size_t points = BeliefGrid::point_count(h.n_c, h.resolution);
    const size_t expected =
        static_cast<size_t>(h.horizon + 1) * points * (h.n_r + 1);
    if (count != expected)
        throw std::runtime_error("value data count does not match header");
    ValueTable table(h.horizon, static_cast<int>(points), h.n_r + 1);
    for (size_t i = 0; i < count; ++i) {
        if (!(is >> table.values[i]))
            throw std::runtime_error("corrupt value data at entry " +
                                     std::to_string(i));
    }
    if (header_out) *header_out = h;
    return table;
}

}  // namespace aoipomdp
