#include "sqg/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sqg {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_i32(std::ostream& os, std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::int32_t read_i32(std::istream& is) {
    std::int32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double read_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void write_field_body(std::ostream& os, const SpectralField& f) {
    write_u32(os, static_cast<std::uint32_t>(f.kmax()));
    write_u32(os, static_cast<std::uint32_t>(f.mode_count()));
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        ModeIndex k = t.mode(i);
        write_i32(os, k.k1);
        write_i32(os, k.k2);
        write_f64(os, f.coeffs()[i].real());
        write_f64(os, f.coeffs()[i].imag());
    }
}

SpectralField read_field_body(std::istream& is) {
    const int kmax = static_cast<int>(read_u32(is));
    const std::uint32_t count = read_u32(is);
    SpectralField f(kmax);
    if (count != f.mode_count()) throw std::runtime_error("field snapshot: mode count mismatch");
    for (std::uint32_t i = 0; i < count; ++i) {
        ModeIndex k{read_i32(is), read_i32(is)};
        double re = read_f64(is);
        double im = read_f64(is);
        f.set_coeff(k, cplx(re, im));
    }
    if (!is) throw std::runtime_error("field snapshot: truncated file");
    return f;
}

void check_magic(std::istream& is, const char* magic) {
    char buf[4];
    is.read(buf, 4);
    if (!is || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(std::string("bad magic, expected ") + magic);
}

void write_string_block(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string_block(std::istream& is) {
    std::uint32_t n = read_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

struct PathHeader {
    SqgParams params;
    std::vector<double> times;
    std::vector<SpectralField> fields;
};

void save_path(const char* magic, const SqgParams& p, const std::vector<double>& times,
               const std::vector<SpectralField>& fields, const std::string& path, int stride) {
    if (stride < 1) throw std::invalid_argument("save: stride must be >= 1");
    auto os = open_out(path);
    os.write(magic, 4);
    write_u32(os, kFormatVersion);
    write_string_block(os, params_to_text(p));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < fields.size(); i += static_cast<std::size_t>(stride)) keep.push_back(i);
    if (keep.empty() || keep.back() != fields.size() - 1) keep.push_back(fields.size() - 1);
    write_u32(os, static_cast<std::uint32_t>(keep.size()));
    for (std::size_t i : keep) {
        write_f64(os, times[i]);
        write_field_body(os, fields[i]);
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

PathHeader load_path(const char* magic, const std::string& path) {
    auto is = open_in(path);
    check_magic(is, magic);
    std::uint32_t ver = read_u32(is);
    if (ver != kFormatVersion) throw std::runtime_error("unsupported format version");
    PathHeader out;
    out.params = params_from_text(read_string_block(is));
    std::uint32_t n = read_u32(is);
    out.times.reserve(n);
    out.fields.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        out.times.push_back(read_f64(is));
        out.fields.push_back(read_field_body(is));
    }
    return out;
}

}  // namespace

void save_field(const SpectralField& f, const std::string& path) {
    auto os = open_out(path);
    os.write("SQGF", 4);
    write_u32(os, kFormatVersion);
    write_field_body(os, f);
    if (!os) throw std::runtime_error("write failed: " + path);
}

SpectralField load_field(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, "SQGF");
    std::uint32_t ver = read_u32(is);
    if (ver != kFormatVersion) throw std::runtime_error("unsupported format version");
    return read_field_body(is);
}

void save_field_csv(const SpectralField& f, const std::string& path) {
    auto os = open_out(path);
    os << "k1,k2,re,im\n";
    const auto& t = f.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
        ModeIndex k = t.mode(i);
        os << k.k1 << "," << k.k2 << "," << format_double(f.coeffs()[i].real()) << ","
           << format_double(f.coeffs()[i].imag()) << "\n";
    }
}

void save_trajectory(const Trajectory& traj, const std::string& path, int stride) {
    save_path("SQGT", traj.params, traj.times, traj.states, path, stride);
}

Trajectory load_trajectory(const std::string& path) {
    PathHeader h = load_path("SQGT", path);
    Trajectory t;
    t.params = h.params;
    t.times = std::move(h.times);
    t.states = std::move(h.fields);
    return t;
}

void save_control(const ControlPath& g, const SqgParams& p, const std::string& path) {
    save_path("SQGC", p, g.times, g.values, path, 1);
}

ControlPath load_control(const std::string& path) {
    PathHeader h = load_path("SQGC", path);
    ControlPath g;
    g.times = std::move(h.times);
    g.values = std::move(h.fields);
    return g;
}

void save_diagnostics_csv(const Trajectory& traj, const std::vector<double>& residual,
                          const std::string& path) {
    const SqgParams& p = traj.params;
    auto os = open_out(path);
    os << "t,l2,h_alpha_minus_2beta,h_2alpha_minus_2beta,residual\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double res = i == 0 || residual.empty() ? 0.0 : residual[std::min(i - 1, residual.size() - 1)];
        os << format_double(traj.times[i]) << "," << format_double(l2_norm(traj.states[i])) << ","
           << format_double(sobolev_norm(traj.states[i], p.alpha - 2.0 * p.beta)) << ","
           << format_double(sobolev_norm(traj.states[i], 2.0 * p.alpha - 2.0 * p.beta)) << ","
           << format_double(res) << "\n";
    }
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            auto b = s.find_first_not_of(ws);
            auto e = s.find_last_not_of(ws);
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

}  // namespace

std::string params_to_text(const SqgParams& p) {
    std::ostringstream os;
    os << "alpha = " << format_double(p.alpha) << "\n";
    os << "beta = " << format_double(p.beta) << "\n";
    os << "epsilon = " << format_double(p.epsilon) << "\n";
    os << "delta = " << format_double(p.delta) << "\n";
    os << "s_reg = " << format_double(p.s_reg) << "\n";
    os << "m = " << p.m << "\n";
    os << "T = " << format_double(p.T) << "\n";
    os << "dt = " << format_double(p.dt) << "\n";
    os << "seed = " << p.seed << "\n";
    os << "blowup_factor = " << format_double(p.blowup_factor) << "\n";
    os << "grid_factor = " << p.grid_factor << "\n";
    return os.str();
}

SqgParams params_from_text(const std::string& text) {
    Config c = config_parse(text);
    return c.params;
}

Config config_parse(const std::string& text) {
    auto kv = parse_kv(text);
    Config c;
    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto as_double = [](const std::string& key, const std::string& v) {
        try {
            return std::stod(v);
        } catch (...) {
            throw std::invalid_argument("config: " + key + " is not a number: " + v);
        }
    };
    if (auto v = take("alpha")) c.params.alpha = as_double("alpha", *v);
    if (auto v = take("beta")) c.params.beta = as_double("beta", *v);
    if (auto v = take("epsilon")) c.params.epsilon = as_double("epsilon", *v);
    if (auto v = take("delta")) c.params.delta = as_double("delta", *v);
    if (auto v = take("s_reg")) c.params.s_reg = as_double("s_reg", *v);
    if (auto v = take("m")) c.params.m = static_cast<int>(as_double("m", *v));
    if (auto v = take("T")) c.params.T = as_double("T", *v);
    if (auto v = take("dt")) c.params.dt = as_double("dt", *v);
    if (auto v = take("seed")) c.params.seed = static_cast<std::uint64_t>(std::stoull(*v));
    if (auto v = take("blowup_factor")) c.params.blowup_factor = as_double("blowup_factor", *v);
    if (auto v = take("grid_factor")) c.params.grid_factor = static_cast<int>(as_double("grid_factor", *v));
    c.extras = kv;
    c.params.validate();
    return c;
}

Config config_load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_parse(ss.str());
}

std::string file_digest(const std::string& path) {
    auto is = open_in(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (is) {
        is.read(buf, sizeof(buf));
        std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string RunManifest::to_text() const {
    std::ostringstream os;
    os << "tool_version = " << tool_version << "\n";
    os << "command = " << command << "\n";
    os << "started_at = " << started_at << "\n";
    os << "finished_at = " << finished_at << "\n";
    os << params_to_text(params);
    for (const auto& [p, d] : inputs) os << "input " << p << " = " << d << "\n";
    for (const auto& [p, d] : outputs) os << "output " << p << " = " << d << "\n";
    return os.str();
}

namespace {
std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}
}  // namespace

std::string RunManifest::to_json() const {
    std::ostringstream os;
    os << "{\n  \"tool_version\": \"" << json_escape(tool_version) << "\",\n";
    os << "  \"command\": \"" << json_escape(command) << "\",\n";
    os << "  \"started_at\": \"" << started_at << "\",\n";
    os << "  \"finished_at\": \"" << finished_at << "\",\n";
    os << "  \"params\": {\"alpha\": " << format_double(params.alpha)
       << ", \"beta\": " << format_double(params.beta)
       << ", \"epsilon\": " << format_double(params.epsilon)
       << ", \"delta\": " << format_double(params.delta)
       << ", \"s_reg\": " << format_double(params.s_reg) << ", \"m\": " << params.m
       << ", \"T\": " << format_double(params.T) << ", \"dt\": " << format_double(params.dt)
       << ", \"seed\": " << params.seed << "},\n";
    auto block = [&](const char* name, const std::map<std::string, std::string>& m) {
        os << "  \"" << name << "\": {";
        bool first = true;
        for (const auto& [p, d] : m) {
            if (!first) os << ", ";
            os << "\"" << json_escape(p) << "\": \"" << d << "\"";
            first = false;
        }
        os << "}";
    };
    block("inputs", inputs);
    os << ",\n";
    block("outputs", outputs);
    os << "\n}\n";
    return os.str();
}

void save_manifest(const RunManifest& m, const std::string& path, bool json) {
    auto os = open_out(path);
    os << (json ? m.to_json() : m.to_text());
}

void verify_manifest_digests(const RunManifest& m) {
    auto check = [](const std::map<std::string, std::string>& files) {
        for (const auto& [path, digest] : files) {
            if (file_digest(path) != digest)
                throw std::runtime_error("manifest digest mismatch for " + path);
        }
    };
    check(m.inputs);
    check(m.outputs);
}

}  // namespace sqg
