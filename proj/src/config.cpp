#include "hallspde/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hallspde {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw std::invalid_argument(key + ": " + what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw)
{
    const std::string text = trim(raw);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        fail(key, "invalid value '" + raw + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(value))
            fail(key, "value must be finite");
    return value;
}

bool parse_bool(const std::string& key, const std::string& raw)
{
    const std::string t = trim(raw);
    if (t == "true" || t == "1" || t == "yes")
        return true;
    if (t == "false" || t == "0" || t == "no")
        return false;
    fail(key, "expected true or false, got '" + raw + "'");
}

template <class T, std::size_t K>
std::array<T, K> parse_tuple(const std::string& key, const std::string& raw)
{
    std::array<T, K> out{};
    std::stringstream ss(raw);
    std::string item;
    std::size_t i = 0;
    while (std::getline(ss, item, ',')) {
        if (i == K)
            fail(key, "expected " + std::to_string(K) + " comma-separated values");
        out[i++] = parse_number<T>(key, item);
    }
    if (i != K)
        fail(key, "expected " + std::to_string(K) + " comma-separated values");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& raw)
{
    std::vector<int> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_number<int>(key, item));
    if (out.empty())
        fail(key, "expected a comma-separated list");
    return out;
}

std::string format(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <class T, std::size_t K>
std::string format(const std::array<T, K>& a)
{
    std::string out;
    for (std::size_t i = 0; i < K; ++i) {
        if (i)
            out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format(a[i]);
        else
            out += std::to_string(a[i]);
    }
    return out;
}

// One section of the file, with every lookup recorded so leftovers can be rejected.
class Section {
public:
    Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

    bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

    std::string raw(const std::string& key)
    {
        used_.insert(key);
        return tree_->get<std::string>(pt::ptree::path_type(key, '\0'));
    }

    std::string required(const std::string& key)
    {
        if (!has(key))
            fail(name_ + "." + key, "missing required key in section [" + name_ + "]");
        return raw(key);
    }

    template <class T>
    void read(const std::string& key, T& target)
    {
        if (!has(key))
            return;
        target = convert<T>(key, raw(key));
    }

    template <class T>
    void read_required(const std::string& key, T& target)
    {
        target = convert<T>(key, required(key));
    }

    void reject_unknown() const
    {
        if (!tree_)
            return;
        for (const auto& [key, _] : *tree_)
            if (!used_.count(key))
                fail(name_ + "." + key, "unknown key in section [" + name_ + "]");
    }

private:
    template <class T>
    T convert(const std::string& key, const std::string& raw) const
    {
        const std::string full = name_ + "." + key;
        if constexpr (std::is_same_v<T, bool>)
            return parse_bool(full, raw);
        else if constexpr (std::is_same_v<T, std::string>)
            return trim(raw);
        else if constexpr (std::is_same_v<T, std::array<int, 3>>)
            return parse_tuple<int, 3>(full, raw);
        else if constexpr (std::is_same_v<T, std::array<double, 3>>)
            return parse_tuple<double, 3>(full, raw);
        else if constexpr (std::is_same_v<T, std::vector<int>>)
            return parse_int_list(full, raw);
        else
            return parse_number<T>(full, raw);
    }

    std::string name_;
    const pt::ptree* tree_;
    std::set<std::string> used_;
};

void read_profile(Section& s, const std::string& name, ModeProfile& p)
{
    s.read("amplitude", p.amplitude);
    s.read("wavevector", p.wavevector);
    s.read("polarization", p.polarization);
    s.read("target", p.target);
    if (p.target != "u" && p.target != "B" && p.target != "both")
        fail(name + ".target", "expected u, B or both, got '" + p.target + "'");
}

void write_profile(std::ostream& out, const ModeProfile& p)
{
    out << "amplitude = " << format(p.amplitude) << '\n'
        << "wavevector = " << format(p.wavevector) << '\n'
        << "polarization = " << format(p.polarization) << '\n'
        << "target = " << p.target << '\n';
}

// a p cos(k . x) on the requested components, Leray-projected.
State profile_state(const WaveGrid& g, const ModeProfile& profile)
{
    const int n = g.resolution();
    const double h = g.box_length() / n;
    const double kappa = g.unit();
    PhysicalField p(g);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l, ++idx) {
                const double phase =
                    kappa * h * (profile.wavevector[0] * i + profile.wavevector[1] * j + profile.wavevector[2] * l);
                const double c = profile.amplitude * std::cos(phase);
                for (int a = 0; a < 3; ++a)
                    p.component(a)[idx] = c * profile.polarization[a];
            }
    const SpectralField f = leray_project(to_spectral(p));
    State s(g);
    if (profile.target != "B")
        s.u = f;
    if (profile.target != "u")
        s.B = f;
    return s;
}

InitialCondition::Kind initial_kind(const std::string& name)
{
    static const std::map<std::string, InitialCondition::Kind> kinds{
        {"zero", InitialCondition::Kind::zero},
        {"abc", InitialCondition::Kind::abc},
        {"taylor_green", InitialCondition::Kind::taylor_green},
        {"single_mode", InitialCondition::Kind::single_mode},
        {"random", InitialCondition::Kind::random}};
    const auto it = kinds.find(name);
    if (it == kinds.end())
        fail("init.kind", "unknown initial condition '" + name + "'");
    return it->second;
}

} // namespace

SimConfig RunSpec::build() const
{
    SimConfig c;
    try {
        c.grid = WaveGrid(N, L);
    } catch (const std::invalid_argument& e) {
        fail("grid.N", e.what());
    }
    c.cutoff = cutoff;
    c.params = physics;
    c.nonlinear = nonlinear;
    c.horizon = T;
    c.dt = dt;
    c.seed = seed;
    c.ensemble_size = ensemble;
    c.moment_orders = q;
    c.guard_radius = guard_radius;

    c.initial.kind = initial_kind(init_kind);
    c.initial.amplitude_u = init_amplitude_u;
    c.initial.amplitude_B = init_amplitude_B;
    c.initial.mode = init_mode;
    c.initial.polarization = init_polarization;
    c.initial.max_mode = init_max_mode;

    if (forcing_kind == "abc")
        c.forcing = {Forcing::Kind::abc, forcing_amplitude_u, forcing_amplitude_B};
    else if (forcing_kind != "none")
        fail("forcing.kind", "expected none or abc, got '" + forcing_kind + "'");

    if (noise_kind == "none") {
        if (!marks.empty())
            fail("noise.marks", "marks given with noise kind none");
        c.noise = NoiseCoefficient::zero(c.grid, 0);
    } else if (noise_kind == "additive" || noise_kind == "multiplicative") {
        if (marks.empty())
            fail("noise.marks", "noise kind " + noise_kind + " needs at least one mark");
        std::vector<Mark> ms;
        c.noise.kind = noise_kind == "additive" ? NoiseKind::additive : NoiseKind::linear_multiplicative;
        double lipschitz = 0.0;
        for (const auto& m : marks) {
            ms.push_back({m.id, m.weight});
            c.noise.scale.push_back(noise_kind == "additive" ? 0.0 : m.scale);
            c.noise.amplitude.push_back(profile_state(c.grid, m.profile));
            lipschitz += m.weight * m.scale * m.scale;
        }
        c.marks = MarkSpace(std::move(ms));
        c.noise.lipschitz = lipschitz;
    } else {
        fail("noise.kind", "expected none, additive or multiplicative, got '" + noise_kind + "'");
    }

    if (wiener_kind == "none") {
        if (!wiener.empty())
            fail("wiener.columns", "columns given with wiener kind none");
    } else if (wiener_kind == "additive" || wiener_kind == "linear") {
        if (wiener.empty())
            fail("wiener.columns", "wiener kind " + wiener_kind + " needs at least one column");
        c.wiener.kind = wiener_kind == "additive" ? WienerDriver::Kind::additive : WienerDriver::Kind::linear;
        c.wiener.dimension = wiener.size();
        for (const auto& col : wiener) {
            c.wiener.columns.push_back(profile_state(c.grid, col.profile));
            c.wiener.sigma.push_back(col.sigma);
        }
        c.wiener.a = wiener_a;
        c.wiener.lambda = wiener_lambda;
        c.wiener.rho = wiener_rho;
    } else {
        fail("wiener.kind", "expected none, additive or linear, got '" + wiener_kind + "'");
    }

    if (init_max_mode < 1)
        fail("init.max_mode", "must be at least 1");
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        // Solver messages start with the bare key; qualify it with its section.
        static const std::map<std::string, std::string> sections{
            {"T", "run.T"}, {"dt", "run.dt"}, {"cutoff", "run.cutoff"}, {"ensemble", "run.ensemble"},
            {"q", "run.q"}, {"guard_radius", "run.guard_radius"}, {"physics", "physics"}, {"noise", "noise"}};
        const auto colon = what.find(':');
        const auto it = sections.find(what.substr(0, colon));
        if (colon != std::string::npos && it != sections.end())
            throw std::invalid_argument(it->second + what.substr(colon));
        throw;
    }
    return c;
}

RunSpec parse_run_spec(std::istream& in, const std::string& source)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    auto child = [&](const std::string& name) -> const pt::ptree* {
        const auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    };

    RunSpec spec;
    std::set<std::string> known{"grid", "physics", "run", "init", "forcing", "noise", "wiener"};

    if (!child("grid"))
        fail("grid.N", "missing required section [grid]");
    Section grid("grid", child("grid"));
    grid.read_required("N", spec.N);
    grid.read("L", spec.L);
    grid.reject_unknown();

    Section physics("physics", child("physics"));
    physics.read("nu1", spec.physics.nu1);
    physics.read("nu2", spec.physics.nu2);
    physics.read("hartmann", spec.physics.hartmann);
    physics.read("hall", spec.physics.hall);
    physics.read("nonlinear", spec.nonlinear);
    physics.reject_unknown();

    if (!child("run"))
        fail("run.T", "missing required section [run]");
    Section run("run", child("run"));
    run.read_required("T", spec.T);
    run.read_required("dt", spec.dt);
    run.read_required("cutoff", spec.cutoff);
    run.read("seed", spec.seed);
    run.read("ensemble", spec.ensemble);
    run.read("q", spec.q);
    run.read("guard_radius", spec.guard_radius);
    run.read("snapshot_every", spec.snapshot_every);
    run.reject_unknown();

    Section init("init", child("init"));
    init.read("kind", spec.init_kind);
    init.read("amplitude_u", spec.init_amplitude_u);
    init.read("amplitude_B", spec.init_amplitude_B);
    init.read("mode", spec.init_mode);
    init.read("polarization", spec.init_polarization);
    init.read("max_mode", spec.init_max_mode);
    init.reject_unknown();

    Section forcing("forcing", child("forcing"));
    forcing.read("kind", spec.forcing_kind);
    forcing.read("amplitude_u", spec.forcing_amplitude_u);
    forcing.read("amplitude_B", spec.forcing_amplitude_B);
    forcing.reject_unknown();

    Section noise("noise", child("noise"));
    std::size_t mark_count = 0;
    noise.read("kind", spec.noise_kind);
    noise.read("marks", mark_count);
    noise.reject_unknown();
    for (std::size_t i = 0; i < mark_count; ++i) {
        const std::string name = "mark_" + std::to_string(i);
        if (!child(name))
            fail(name, "missing section [" + name + "] (noise.marks = " + std::to_string(mark_count) + ")");
        known.insert(name);
        Section s(name, child(name));
        MarkSpec m;
        m.id = "m" + std::to_string(i);
        s.read("id", m.id);
        s.read_required("weight", m.weight);
        s.read("scale", m.scale);
        read_profile(s, name, m.profile);
        s.reject_unknown();
        if (m.weight < 0.0)
            fail(name + ".weight", "must be >= 0");
        spec.marks.push_back(std::move(m));
    }

    Section wiener("wiener", child("wiener"));
    std::size_t columns = 0;
    wiener.read("kind", spec.wiener_kind);
    wiener.read("columns", columns);
    wiener.read("a", spec.wiener_a);
    wiener.read("lambda", spec.wiener_lambda);
    wiener.read("rho", spec.wiener_rho);
    wiener.reject_unknown();
    for (std::size_t i = 0; i < columns; ++i) {
        const std::string name = "wiener_" + std::to_string(i);
        if (!child(name))
            fail(name, "missing section [" + name + "] (wiener.columns = " + std::to_string(columns) + ")");
        known.insert(name);
        Section s(name, child(name));
        WienerColumnSpec col;
        s.read("sigma", col.sigma);
        read_profile(s, name, col.profile);
        s.reject_unknown();
        spec.wiener.push_back(std::move(col));
    }

    for (const auto& [name, _] : tree)
        if (!known.count(name))
            fail(name, "unknown section [" + name + "]");

    spec.build();  // full validation
    return spec;
}

RunSpec load_run_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path.string() + "'");
    return parse_run_spec(in, path.string());
}

SimConfig parse_config(const std::filesystem::path& path)
{
    return load_run_spec(path).build();
}

void write_config(std::ostream& out, const RunSpec& s)
{
    out << "[grid]\n"
        << "N = " << s.N << '\n'
        << "L = " << format(s.L) << "\n\n";
    out << "[physics]\n"
        << "nu1 = " << format(s.physics.nu1) << '\n'
        << "nu2 = " << format(s.physics.nu2) << '\n'
        << "hartmann = " << format(s.physics.hartmann) << '\n'
        << "hall = " << format(s.physics.hall) << '\n'
        << "nonlinear = " << (s.nonlinear ? "true" : "false") << "\n\n";
    out << "[run]\n"
        << "T = " << format(s.T) << '\n'
        << "dt = " << format(s.dt) << '\n'
        << "cutoff = " << format(s.cutoff) << '\n'
        << "seed = " << s.seed << '\n'
        << "ensemble = " << s.ensemble << '\n'
        << "q = ";
    for (std::size_t i = 0; i < s.q.size(); ++i)
        out << (i ? "," : "") << s.q[i];
    out << '\n'
        << "guard_radius = " << format(s.guard_radius) << '\n'
        << "snapshot_every = " << s.snapshot_every << "\n\n";
    out << "[init]\n"
        << "kind = " << s.init_kind << '\n'
        << "amplitude_u = " << format(s.init_amplitude_u) << '\n'
        << "amplitude_B = " << format(s.init_amplitude_B) << '\n'
        << "mode = " << format(s.init_mode) << '\n'
        << "polarization = " << format(s.init_polarization) << '\n'
        << "max_mode = " << s.init_max_mode << "\n\n";
    out << "[forcing]\n"
        << "kind = " << s.forcing_kind << '\n'
        << "amplitude_u = " << format(s.forcing_amplitude_u) << '\n'
        << "amplitude_B = " << format(s.forcing_amplitude_B) << "\n\n";
    out << "[noise]\n"
        << "kind = " << s.noise_kind << '\n'
        << "marks = " << s.marks.size() << "\n\n";
    for (std::size_t i = 0; i < s.marks.size(); ++i) {
        const auto& m = s.marks[i];
        out << "[mark_" << i << "]\n"
            << "id = " << m.id << '\n'
            << "weight = " << format(m.weight) << '\n'
            << "scale = " << format(m.scale) << '\n';
        write_profile(out, m.profile);
        out << '\n';
    }
    out << "[wiener]\n"
        << "kind = " << s.wiener_kind << '\n'
        << "columns = " << s.wiener.size() << '\n'
        << "a = " << format(s.wiener_a) << '\n'
        << "lambda = " << format(s.wiener_lambda) << '\n'
        << "rho = " << format(s.wiener_rho) << '\n';
    for (std::size_t i = 0; i < s.wiener.size(); ++i) {
        out << "\n[wiener_" << i << "]\n"
            << "sigma = " << format(s.wiener[i].sigma) << '\n';
        write_profile(out, s.wiener[i].profile);
    }
}

std::string resolved_config(const RunSpec& spec)
{
    std::ostringstream out;
    write_config(out, spec);
    return out.str();
}

std::uint64_t config_hash(const RunSpec& spec)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : resolved_config(spec)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const char* command_name(CommandKind kind)
{
    switch (kind) {
    case CommandKind::simulate:
        return "simulate";
    case CommandKind::ensemble:
        return "ensemble";
    case CommandKind::study:
        return "study";
    case CommandKind::verify:
        return "verify";
    }
    return "unknown";
}

RunManifest make_manifest(RunSpec spec, std::filesystem::path out_dir, CommandKind kind)
{
    RunManifest m;
    m.hash = config_hash(spec);
    m.spec = std::move(spec);
    m.out_dir = std::move(out_dir);
    m.kind = kind;
    return m;
}

void write_manifest(const RunManifest& manifest)
{
    std::filesystem::create_directories(manifest.out_dir);
    std::ofstream out(manifest.out_dir / "manifest.txt");
    if (!out)
        throw std::runtime_error("manifest: cannot write " + (manifest.out_dir / "manifest.txt").string());
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(manifest.hash));
    out << "# command = " << command_name(manifest.kind) << '\n'
        << "# version = " << manifest.version << '\n'
        << "# config_hash = " << hash << '\n';
    write_config(out, manifest.spec);
}

} // namespace hallspde
