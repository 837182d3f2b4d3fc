#include "hallspde/commands.hpp"

#include "hallspde/diagnostics.hpp"
#include "hallspde/snapshot.hpp"
#include "hallspde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace hallspde {
namespace {

namespace fs = std::filesystem;

void prepare_output(const RunManifest& manifest, bool force)
{
    if (fs::exists(manifest.out_dir / "manifest.txt") && !force)
        throw std::runtime_error("output directory '" + manifest.out_dir.string() +
                                 "' already holds a run; pass --force to overwrite");
    write_manifest(manifest);
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    return out;
}

// Flat summary: one "name = value" line per metric.
class Report {
public:
    void add(const std::string& name, const std::string& value) { lines_.emplace_back(name, value); }
    void add(const std::string& name, const char* value) { lines_.emplace_back(name, value); }
    void add(const std::string& name, std::size_t value) { lines_.emplace_back(name, std::to_string(value)); }
    void add(const std::string& name, bool value) { lines_.emplace_back(name, value ? "true" : "false"); }
    void add(const std::string& name, double value)
    {
        std::ostringstream s;
        s.precision(17);
        s << value;
        lines_.emplace_back(name, s.str());
    }
    void add(const std::string& name, double value, double stderr_value)
    {
        add(name, value);
        add(name + "_stderr", stderr_value);
    }
    void write(const fs::path& path) const
    {
        auto out = open_output(path);
        for (const auto& [k, v] : lines_)
            out << k << " = " << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

void write_moments_header(std::ostream& out)
{
    out << "level,q,sup_moment,sup_stderr,integral_moment,integral_stderr,guard_hits,M\n";
}

void write_moment_rows(std::ostream& out, const MomentReport& r)
{
    for (const auto& e : r.estimates)
        out << r.level << ',' << e.q << ',' << e.sup_mean << ',' << e.sup_stderr << ',' << e.dissipation_mean << ','
            << e.dissipation_stderr << ',' << r.guard_hits << ',' << r.ensemble_size << '\n';
}

void add_moments(Report& report, const MomentReport& r, const std::string& prefix)
{
    for (const auto& e : r.estimates) {
        const std::string q = std::to_string(e.q);
        report.add(prefix + "sup_moment_q" + q, e.sup_mean, e.sup_stderr);
        report.add(prefix + "dissipation_moment_q" + q, e.dissipation_mean, e.dissipation_stderr);
    }
    report.add(prefix + "v_integral", r.v_integral_mean, r.v_integral_stderr);
    report.add(prefix + "guard_radius", r.guard_radius);
    report.add(prefix + "guard_hits", r.guard_hits);
}

// Per-trajectory reduction for ensembles: moment ingredients and the energy
// at the step grid (jump samples dropped so rows align across trajectories).
struct Reduced {
    MomentSample moments;
    std::vector<double> t, h, d;
    double guard_radius = 0.0;
    double max_cfl = 0.0;
};

Reduced reduce_trajectory(Trajectory&& traj, std::span<const int> orders)
{
    Reduced r{moment_sample(traj, orders), {}, {}, {}, traj.guard_radius, traj.max_cfl};
    for (const auto& s : traj.samples)
        if (!s.jump) {
            r.t.push_back(s.t);
            r.h.push_back(s.h_sq);
            r.d.push_back(s.dirichlet_sq);
        }
    return r;
}

MomentReport run_moments(const SimConfig& config, unsigned jobs, std::vector<Reduced>& reduced)
{
    const auto orders = config.moment_orders;
    reduced = run_ensemble_reduce(config, jobs, SimOptions{},
                                  [&](Trajectory&& t) { return reduce_trajectory(std::move(t), orders); });
    std::vector<MomentSample> samples;
    double guard = 0.0;
    for (const auto& r : reduced) {
        samples.push_back(r.moments);
        guard = std::max(guard, r.guard_radius);
    }
    return moment_report(samples, orders, guard, config.cutoff);
}

void write_mean_energies(const fs::path& path, const std::vector<Reduced>& reduced)
{
    auto out = open_output(path);
    out << "t,H_norm_sq_mean,H_norm_sq_stderr,dirichlet_sq_mean,V_norm_sq_mean,count\n";
    std::size_t rows = 0;
    for (const auto& r : reduced)
        rows = std::max(rows, r.t.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> h, d;
        double t = 0.0;
        for (const auto& r : reduced)
            if (i < r.t.size()) {
                t = r.t[i];
                h.push_back(r.h[i]);
                d.push_back(r.d[i]);
            }
        const auto [hm, hs] = mean_and_stderr(h);
        const auto [dm, ds] = mean_and_stderr(d);
        out << t << ',' << hm << ',' << hs << ',' << dm << ',' << hm + dm << ',' << h.size() << '\n';
    }
}

} // namespace

int cmd_simulate(const RunManifest& manifest, const CommandOptions& options)
{
    const SimConfig config = manifest.spec.build();
    prepare_output(manifest, options.force);
    const fs::path& dir = manifest.out_dir;

    SimOptions sim;
    sim.keep_states = manifest.spec.snapshot_every > 0;
    const Trajectory traj = simulate(config, 0, sim);

    {
        auto out = open_output(dir / "energies.csv");
        write_energy_csv(out, energy_series(traj));
    }
    {
        auto out = open_output(dir / "jumps.csv");
        write_jump_csv(out, traj.stream, config.marks);
    }
    if (sim.keep_states) {
        fs::create_directories(dir / "snapshots");
        for (std::size_t i = 0; i < traj.states.size(); i += manifest.spec.snapshot_every) {
            char name[32];
            std::snprintf(name, sizeof name, "state_%06zu.bin", i);
            write_snapshot(dir / "snapshots" / name, traj.states[i]);
        }
    }

    Report report;
    report.add("command", "simulate");
    report.add("trajectory", traj.index);
    report.add("samples", traj.samples.size());
    report.add("jumps", traj.jumps.size());
    report.add("initial_H_norm_sq", traj.samples.front().h_sq);
    report.add("final_H_norm_sq", traj.samples.back().h_sq);
    report.add("energy_balance_residual", energy_balance_residual(traj));
    report.add("max_cfl", traj.max_cfl);
    report.add("guard_radius", traj.guard_radius);
    report.add("guard_hit", traj.guard_hit);
    if (traj.guard_hit)
        report.add("guard_time", traj.guard_time);
    report.write(dir / "report.txt");

    if (traj.max_cfl > 1.0)
        std::cerr << "warning: advective CFL number " << traj.max_cfl << " exceeds 1; consider a smaller dt\n";
    return traj.guard_hit ? 3 : 0;
}

int cmd_ensemble(const RunManifest& manifest, const CommandOptions& options)
{
    const SimConfig config = manifest.spec.build();
    prepare_output(manifest, options.force);
    const fs::path& dir = manifest.out_dir;

    std::vector<Reduced> reduced;
    const MomentReport moments = run_moments(config, options.jobs, reduced);
    {
        auto out = open_output(dir / "moments.csv");
        write_moments_header(out);
        write_moment_rows(out, moments);
    }
    write_mean_energies(dir / "energies.csv", reduced);

    double cfl = 0.0;
    for (const auto& r : reduced)
        cfl = std::max(cfl, r.max_cfl);
    Report report;
    report.add("command", "ensemble");
    report.add("ensemble_size", moments.ensemble_size);
    report.add("level", config.cutoff);
    add_moments(report, moments, "");
    report.add("max_cfl", cfl);
    report.write(dir / "report.txt");
    return 0;
}

int cmd_study(const RunManifest& manifest, const CommandOptions& options)
{
    if (options.levels.size() < 2)
        throw std::invalid_argument("levels: study needs at least two levels");
    std::vector<SimConfig> configs;
    for (double level : options.levels) {
        RunSpec spec = manifest.spec;
        spec.cutoff = level;
        configs.push_back(spec.build());
    }
    prepare_output(manifest, options.force);
    const fs::path& dir = manifest.out_dir;

    Report report;
    report.add("command", "study");
    report.add("coupling", "pathwise: every level uses the same seeds and jump streams");
    std::vector<MomentReport> moments;
    {
        auto out = open_output(dir / "moments.csv");
        write_moments_header(out);
        for (const auto& c : configs) {
            std::vector<Reduced> reduced;
            moments.push_back(run_moments(c, options.jobs, reduced));
            write_moment_rows(out, moments.back());
        }
    }
    for (std::size_t i = 0; i < configs.size(); ++i) {
        std::ostringstream prefix;
        prefix << "level_" << configs[i].cutoff << '_';
        add_moments(report, moments[i], prefix.str());
    }
    for (int q : configs.front().moment_orders) {
        double lo = INFINITY, hi = 0.0;
        for (const auto& m : moments) {
            lo = std::min(lo, m.at(q).sup_mean);
            hi = std::max(hi, m.at(q).sup_mean);
        }
        report.add("sup_moment_ratio_q" + std::to_string(q), lo > 0.0 ? hi / lo : 1.0);
    }

    // Coupled comparison on the first few trajectories.
    const std::size_t coupled = std::min<std::size_t>(configs.front().ensemble_size, 4);
    auto out = open_output(dir / "coupled.csv");
    out << "level_a,level_b,trajectory,l2_distance\n";
    SimOptions keep;
    keep.keep_states = true;
    for (std::size_t k = 0; k < coupled; ++k) {
        std::vector<Trajectory> runs;
        for (const auto& c : configs)
            runs.push_back(simulate(c, k, keep));
        for (std::size_t a = 0; a < runs.size(); ++a)
            for (std::size_t b = a + 1; b < runs.size(); ++b) {
                double d = NAN;
                if (!runs[a].guard_hit && !runs[b].guard_hit)
                    d = coupled_l2_distance(runs[a], runs[b]);
                out << configs[a].cutoff << ',' << configs[b].cutoff << ',' << k << ',' << d << '\n';
                if (k == 0) {
                    std::ostringstream key;
                    key << "coupled_l2_distance_" << configs[a].cutoff << '_' << configs[b].cutoff;
                    report.add(key.str(), d);
                }
            }
    }
    report.write(dir / "report.txt");
    return 0;
}

int cmd_verify(const RunManifest& manifest, const CommandOptions& options)
{
    const SimConfig config = manifest.spec.build();
    prepare_output(manifest, options.force);
    const fs::path& dir = manifest.out_dir;

    const auto results = run_property_suites(config);
    auto report = open_output(dir / "report.txt");
    auto failures = open_output(dir / "failures.txt");
    std::size_t failed = 0;
    for (const auto& r : results) {
        report << r.suite << '.' << r.name << ' ' << (r.passed ? "PASS" : "FAIL") << ' ' << r.detail << '\n';
        if (!r.passed) {
            failures << r.suite << '.' << r.name << ": " << r.detail << '\n';
            ++failed;
        }
    }
    report << "checks = " << results.size() << "\nfailed = " << failed << '\n';
    return failed == 0 ? 0 : 1;
}

} // namespace hallspde
