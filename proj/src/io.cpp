#include "csstokes/io.hpp"

#include "csstokes/init.hpp"

#include <openssl/evp.h>

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csstokes/picard.hpp"

namespace csstokes {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "box_length", "grid_n", "n_particles", "dt", "t_end", "kernel.family", "kernel.c", "picard_tol",
        "picard_max_iter", "output_every", "seed", "mode", "init.particles", "init.fluid", "weights.alpha",
        "weights.gamma", "q"};
    return keys;
}

const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> keys = {"box_length", "grid_n", "n_particles", "dt", "t_end"};
    return keys;
}

double to_double(const std::string& key, const std::string& value, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size())
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": '" + value + "' is not a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& value, int line) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size())
        throw ConfigError("line " + std::to_string(line) + ": " + key + ": '" + value + "' is not an integer");
    return v;
}

}  // namespace

SimConfig parse_config_text(const std::string& text, const std::string& source) {
    std::map<std::string, std::pair<std::string, int>> entries;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (!known_keys().count(key))
            throw ConfigError(source + ":" + std::to_string(line) + ": unknown key '" + key + "'");
        if (auto it = entries.find(key); it != entries.end())
            throw ConfigError(source + ": duplicate key '" + key + "' at lines " + std::to_string(it->second.second) +
                              " and " + std::to_string(line));
        entries[key] = {value, line};
    }
    for (const auto& key : required_keys())
        if (!entries.count(key)) throw ConfigError(source + ": missing required key '" + key + "'");

    SimConfig c;
    for (const auto& [key, entry] : entries) {
        const auto& [value, ln] = entry;
        const std::string where = source + ":" + std::to_string(ln) + ": ";
        try {
            if (key == "box_length") c.box_length = to_double(key, value, ln);
            else if (key == "grid_n") c.grid_n = static_cast<int>(to_integer(key, value, ln));
            else if (key == "n_particles") c.particle_count = static_cast<int>(to_integer(key, value, ln));
            else if (key == "dt") c.dt = to_double(key, value, ln);
            else if (key == "t_end") c.t_end = to_double(key, value, ln);
            else if (key == "kernel.family") {
                if (value == "rational_decay") c.kernel.family = KernelFamily::rational_decay;
                else if (value == "constant") c.kernel.family = KernelFamily::constant;
                else throw ConfigError("kernel.family: expected rational_decay or constant");
            } else if (key == "kernel.c") c.kernel.c = to_double(key, value, ln);
            else if (key == "picard_tol") c.picard_tol = to_double(key, value, ln);
            else if (key == "picard_max_iter") c.picard_max_iter = static_cast<int>(to_integer(key, value, ln));
            else if (key == "output_every") c.output_every = static_cast<int>(to_integer(key, value, ln));
            else if (key == "seed") c.rng_seed = static_cast<std::uint64_t>(to_integer(key, value, ln));
            else if (key == "mode") {
                if (value == "pure_kinetic") c.mode = CouplingMode::pure_kinetic;
                else if (value == "frozen_fluid") c.mode = CouplingMode::frozen_fluid;
                else if (value == "full_coupling") c.mode = CouplingMode::full_coupling;
                else throw ConfigError("mode: expected exactly one of pure_kinetic, frozen_fluid, full_coupling");
            } else if (key == "init.particles") {
                ParticleInitSpec::parse(value);
                c.init_particles = value;
            } else if (key == "init.fluid") {
                FluidInitSpec::parse(value);
                c.init_fluid = value;
            }
            else if (key == "weights.alpha") c.weights.alpha = to_double(key, value, ln);
            else if (key == "weights.gamma") c.weights.gamma = to_double(key, value, ln);
            else if (key == "q") c.q = to_double(key, value, ln);
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            throw ConfigError(msg.rfind("line ", 0) == 0 ? source + ": " + msg : where + msg);
        }
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(':'));
        const auto it = entries.find(key == "kernel" ? "kernel.family" : key);
        if (it != entries.end()) throw ConfigError(source + ":" + std::to_string(it->second.second) + ": " + msg);
        throw ConfigError(source + ": " + msg);
    }
    return c;
}

SimConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string config_echo(const SimConfig& c) {
    std::ostringstream os;
    os << "box_length = " << fmt17(c.box_length) << "\n"
       << "grid_n = " << c.grid_n << "\n"
       << "n_particles = " << c.particle_count << "\n"
       << "dt = " << fmt17(c.dt) << "\n"
       << "t_end = " << fmt17(c.t_end) << "\n"
       << "kernel.family = " << to_string(c.kernel.family) << "\n"
       << "kernel.c = " << fmt17(c.kernel.c) << "\n"
       << "picard_tol = " << fmt17(c.picard_tol) << "\n"
       << "picard_max_iter = " << c.picard_max_iter << "\n"
       << "output_every = " << c.output_every << "\n"
       << "seed = " << c.rng_seed << "\n"
       << "mode = " << to_string(c.mode) << "\n"
       << "init.particles = " << c.init_particles << "\n"
       << "init.fluid = " << c.init_fluid << "\n"
       << "weights.alpha = " << fmt17(c.weights.alpha) << "\n"
       << "weights.gamma = " << fmt17(c.weights.gamma) << "\n"
       << "q = " << fmt17(c.q) << "\n";
    return os.str();
}

const std::vector<std::string>& timeseries_columns() {
    static const std::vector<std::string> cols = {
        "time", "mass", "momentum_x", "momentum_y", "momentum_z", "E_particles", "E_fluid", "D_viscous", "D_drag",
        "D_align", "R", "R_bound", "M2", "M3", "M6", "var_v", "picard_iters"};
    return cols;
}

std::string format_timeseries(std::span<const DiagnosticsRecord> records) {
    std::string out;
    const auto& cols = timeseries_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
    out += "\n";
    for (const auto& r : records) {
        const double values[] = {r.time, r.mass, r.momentum.x, r.momentum.y, r.momentum.z, r.energy_particles,
                                 r.energy_fluid, r.dissipation_viscous, r.dissipation_drag, r.dissipation_alignment,
                                 r.support_radius, r.support_bound, r.moment2, r.moment3, r.moment6,
                                 r.velocity_variance};
        for (double v : values) out += fmt17(v) + ",";
        out += std::to_string(r.picard_iters) + "\n";
    }
    return out;
}

void write_timeseries(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write time series " + path.string());
    out << format_timeseries(records);
    if (!out) throw std::runtime_error("I/O error writing time series " + path.string());
}

std::vector<DiagnosticsRecord> read_timeseries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read time series " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<DiagnosticsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != timeseries_columns().size())
            throw std::runtime_error("malformed time series row in " + path.string());
        auto d = [&](int k) { return std::strtod(f[k].c_str(), nullptr); };
        DiagnosticsRecord r;
        r.time = d(0);
        r.mass = d(1);
        r.momentum = {d(2), d(3), d(4)};
        r.energy_particles = d(5);
        r.energy_fluid = d(6);
        r.dissipation_viscous = d(7);
        r.dissipation_drag = d(8);
        r.dissipation_alignment = d(9);
        r.support_radius = d(10);
        r.support_bound = d(11);
        r.moment2 = d(12);
        r.moment3 = d(13);
        r.moment6 = d(14);
        r.velocity_variance = d(15);
        r.picard_iters = std::stoi(f[16]);
        records.push_back(r);
    }
    return records;
}

namespace {

constexpr char kMagic[8] = {'C', 'S', 'S', 'C', 'H', 'K', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(v >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw std::runtime_error("checkpoint truncated");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    return v;
}

struct NamedArray {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

std::vector<double> flatten(std::span<const Vec3> v) {
    std::vector<double> out;
    out.reserve(3 * v.size());
    for (const Vec3& p : v) out.insert(out.end(), {p.x, p.y, p.z});
    return out;
}

std::vector<Vec3> unflatten(const std::vector<double>& d) {
    std::vector<Vec3> out(d.size() / 3);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return out;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const SimConfig& config, const RunState& rs) {
    const auto& e = rs.state.ensemble;
    const auto& f = rs.state.fluid;
    const std::size_t nodes = f.grid.nodes(), modes = f.grid.modes();

    std::vector<NamedArray> arrays;
    arrays.push_back({"positions", {e.size(), 3}, flatten(e.positions())});
    arrays.push_back({"velocities", {e.size(), 3}, flatten(e.velocities())});
    arrays.push_back({"weights", {e.size()}, {e.weights().begin(), e.weights().end()}});
    NamedArray grid{"velocity_grid", {3, nodes}, {}};
    NamedArray pressure{"pressure_gradient_grid", {3, nodes}, {}};
    NamedArray spectral{"velocity_spectral", {3, modes, 2}, {}};
    for (int c = 0; c < 3; ++c) {
        grid.data.insert(grid.data.end(), f.velocity_grid[c].begin(), f.velocity_grid[c].end());
        pressure.data.insert(pressure.data.end(), f.pressure_gradient_grid[c].begin(), f.pressure_gradient_grid[c].end());
        for (const Complex& z : f.velocity_spectral[c]) spectral.data.insert(spectral.data.end(), {z.real(), z.imag()});
    }
    arrays.push_back(std::move(grid));
    arrays.push_back(std::move(spectral));
    arrays.push_back(std::move(pressure));
    arrays.push_back({"scalars",
                      {5},
                      {static_cast<double>(rs.state.step) * config.dt, e.initial_support_radius(), rs.quadrature.support,
                       rs.quadrature.u_max, rs.pending_half_dt}});

    nlohmann::json header;
    header["format"] = "csstokes-checkpoint";
    header["version"] = 1;
    header["byte_order"] = "little";
    header["step"] = rs.state.step;
    header["last_picard_iters"] = rs.last_picard_iters;
    header["n_particles"] = e.size();
    header["grid_n"] = f.grid.n;
    header["box_length"] = f.grid.length;
    header["config"] = config_echo(config);
    header["scalars"] = {"time", "initial_support_radius", "support_integral", "u_max_integral", "pending_half_dt"};
    std::uint64_t offset = 0;
    for (const auto& a : arrays) {
        header["arrays"].push_back({{"name", a.name}, {"shape", a.shape}, {"dtype", "f64le"}, {"offset", offset},
                                    {"count", a.data.size()}});
        offset += 8 * a.data.size();
    }
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out.write(kMagic, 8);
    put_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& a : arrays)
        for (double v : a.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw std::runtime_error("I/O error writing checkpoint " + path.string());
}

CheckpointData read_checkpoint(const std::filesystem::path& path, RunState& rs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error(path.string() + " is not a checkpoint");
    const std::uint64_t header_size = get_u64(in);
    std::string text(header_size, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_size));
    if (!in) throw std::runtime_error("checkpoint header truncated");
    const auto header = nlohmann::json::parse(text);

    std::map<std::string, std::vector<double>> arrays;
    for (const auto& a : header.at("arrays")) {
        const std::size_t count = a.at("count").get<std::size_t>();
        std::vector<double> data(count);
        for (auto& v : data) v = std::bit_cast<double>(get_u64(in));
        arrays[a.at("name").get<std::string>()] = std::move(data);
    }

    CheckpointData out;
    out.config_text = header.at("config").get<std::string>();
    out.config = parse_config_text(out.config_text, path.string() + " (config echo)");
    out.step = header.at("step").get<long>();
    out.particle_count = header.at("n_particles").get<std::size_t>();
    out.grid_n = header.at("grid_n").get<int>();
    const auto& scalars = arrays.at("scalars");
    out.time = scalars.at(0);

    const double length = header.at("box_length").get<double>();
    rs.state.ensemble = ParticleEnsemble::restore(length, unflatten(arrays.at("positions")),
                                                  unflatten(arrays.at("velocities")), arrays.at("weights"), scalars.at(1));
    const Grid grid{out.grid_n, length};
    FluidState f = FluidState::zero(grid);
    const auto& g = arrays.at("velocity_grid");
    const auto& p = arrays.at("pressure_gradient_grid");
    const auto& s = arrays.at("velocity_spectral");
    for (int c = 0; c < 3; ++c) {
        std::copy_n(g.begin() + c * grid.nodes(), grid.nodes(), f.velocity_grid[c].begin());
        std::copy_n(p.begin() + c * grid.nodes(), grid.nodes(), f.pressure_gradient_grid[c].begin());
        for (std::size_t m = 0; m < grid.modes(); ++m)
            f.velocity_spectral[c][m] = Complex(s[2 * (c * grid.modes() + m)], s[2 * (c * grid.modes() + m) + 1]);
    }
    rs.state.fluid = std::move(f);
    rs.state.step = out.step;
    rs.quadrature.support = scalars.at(2);
    rs.quadrature.u_max = scalars.at(3);
    rs.pending_half_dt = scalars.at(4);
    rs.last_picard_iters = header.value("last_picard_iters", 0);
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char two[3];
    for (unsigned int k = 0; k < len; ++k) {
        std::snprintf(two, sizeof two, "%02x", digest[k]);
        hex += two;
    }
    return hex;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::json j;
    j["config"] = m.config_text;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["start_time"] = m.start_time;
    j["end_time"] = m.end_time;
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a : m.artifacts) j["artifacts"].push_back({{"file", a.file}, {"sha256", a.sha256}});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << j.dump(2) << "\n";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* version_string() { return "csstokes 0.1.0"; }

}  // namespace csstokes
