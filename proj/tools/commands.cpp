#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "biphoton/assembly.hpp"
#include "biphoton/distsim.hpp"
#include "biphoton/random.hpp"
#include "biphoton/strategy.hpp"

namespace biphoton::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultSeed = 1;

constexpr const char *kVerbatimWarning =
    "warning: paper-verbatim site-2 observables give S = -2*sqrt(2) on |Phi+>; "
    "see docs/sign_convention.md";

// Writes to a file, or to `fallback` when the path is empty or "-".
class Sink {
   public:
    Sink(const std::string &path, std::ostream &fallback) : path_(path) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw IoError("cannot open '" + path + "' for writing");
            stream_ = file_.get();
        }
    }
    std::ostream &stream() { return *stream_; }
    bool is_file() const { return file_ != nullptr; }
    void close() {
        stream_->flush();
        if (!*stream_) throw IoError("write to '" + path_ + "' failed");
    }

   private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream *stream_ = nullptr;
};

double round9(double x) {
    const double r = std::round(x * 1e9) / 1e9;
    return r == 0 ? 0.0 : r;
}

nlohmann::ordered_json optional_number(std::optional<double> x) {
    return x ? nlohmann::ordered_json(round9(*x)) : nlohmann::ordered_json(nullptr);
}

std::size_t checked_steps(long long steps, bool allow_zero) {
    if (steps < 0 || (!allow_zero && steps == 0)) {
        throw UsageError(allow_zero ? "steps must be >= 0" : "steps must be ≥ 1");
    }
    return static_cast<std::size_t>(steps);
}

Strategy parse_strategy_flag(const std::string &spec, std::ostream &err) {
    auto s = parse_strategy(spec);
    if (auto *q = std::get_if<QuantumStrategy>(&s); q && q->settings.variant == SettingsVariant::PaperVerbatim) {
        err << kVerbatimWarning << '\n';
    }
    return s;
}

struct TimelineFlags {
    double d1 = 0, d2 = 0, d12 = 0;
    double speed = kSpeedOfLight;
    double cadence = 0;
    long long steps = 1000;
    std::uint64_t seed = kDefaultSeed;

    void add_to(CLI::App &cmd) {
        cmd.add_option("--d1", d1, "CPU to site 1 distance (m)");
        cmd.add_option("--d2", d2, "CPU to site 2 distance (m)");
        cmd.add_option("--d12", d12, "site 1 to site 2 distance (m)");
        cmd.add_option("--speed", speed, "signal speed (m/s)");
        cmd.add_option("--cadence", cadence, "seconds between CPU emissions");
        cmd.add_option("--steps", steps, "number of steps M");
        cmd.add_option("--seed", seed, "random seed");
    }

    TimelineConfig config() const {
        TimelineConfig c{d1, d2, d12, speed, cadence, checked_steps(steps, true)};
        c.validate();
        return c;
    }
};

void cmd_chsh(const std::string &settings, std::ostream &out, std::ostream &err) {
    const auto variant = settings == "corrected" ? SettingsVariant::Corrected : SettingsVariant::PaperVerbatim;
    if (variant == SettingsVariant::PaperVerbatim) err << kVerbatimWarning << '\n';
    out << fixed9(chsh(BiphotonState::phi_plus(), MeasurementSettings::of(variant))) << '\n';
}

void cmd_bound(std::ostream &out) {
    const auto rows = enumerate_deterministic();
    out << "strategy,exact_noncr,chsh_S\n";
    double best = rows.front().second.exact_noncr, worst = best;
    for (const auto &[d, v] : rows) {
        out << format_strategy(d) << ',' << fixed9(v.exact_noncr) << ',' << fixed9(v.chsh_S) << '\n';
        best = std::max(best, v.exact_noncr);
        worst = std::min(worst, v.exact_noncr);
    }
    out << "max," << fixed9(best) << ",\n";
    out << "min," << fixed9(worst) << ",\n";
}

void cmd_exact(const std::string &spec, std::ostream &out, std::ostream &err) {
    const auto s = parse_strategy_flag(spec, err);
    const auto v = exact_value(s);
    out << "strategy,exact_noncr,chsh_S\n";
    out << csv_field(format_strategy(s)) << ',' << fixed9(v.exact_noncr) << ',' << fixed9(v.chsh_S) << '\n';
}

nlohmann::ordered_json report_json(const std::string &strategy, std::size_t steps, std::uint64_t seed,
                                   std::optional<double> noncr, std::optional<double> chsh_S,
                                   std::optional<double> makespan) {
    nlohmann::ordered_json j;
    j["strategy"] = strategy;
    j["steps"] = steps;
    j["seed"] = seed;
    j["noncr_fraction"] = optional_number(noncr);
    j["stderr"] = noncr ? optional_number(binomial_stderr(*noncr, steps)) : nlohmann::ordered_json(nullptr);
    j["chsh_S"] = optional_number(chsh_S);
    j["makespan_s"] = makespan ? nlohmann::ordered_json(*makespan) : nlohmann::ordered_json(nullptr);
    return j;
}

void dump_chain(const std::string &path, const Chain &chain) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    write_chain(f, chain);
    if (!f.flush()) throw IoError("write to '" + path + "' failed");
}

struct SimulateFlags {
    std::string strategy;
    long long steps = 0;
    std::uint64_t seed = kDefaultSeed;
    std::string out_path;
    std::string format = "json";
    std::string chain1_path, chain2_path;
};

void cmd_simulate(const SimulateFlags &f, std::ostream &out, std::ostream &err) {
    const auto strategy = parse_strategy_flag(f.strategy, err);
    const auto steps = checked_steps(f.steps, false);
    Sink sink(f.out_path, out);

    RandomStream rng(f.seed);
    const auto [chain1, chain2] = run_assembly(strategy, steps, rng);
    const auto report = overlay(chain1, chain2);
    const auto summary = report_json(format_strategy(strategy), steps, f.seed, report.noncr_fraction,
                                     exact_value(strategy).chsh_S, std::nullopt);

    if (f.format == "json") {
        sink.stream() << summary.dump(2) << '\n';
    } else {
        auto &o = sink.stream();
        o << "step,type1,type2,s1,s2,cr\n";
        for (std::size_t k = 0; k < steps; ++k) {
            const auto &x = chain1.blocks[k];
            const auto &y = chain2.blocks[k];
            o << k << ',' << type_char(x.type) << ',' << type_char(y.type) << ',' << x.shift.sign() << ','
              << y.shift.sign() << ',' << criticality({x.type, y.type, x.shift, y.shift}) << '\n';
        }
        if (sink.is_file()) out << summary.dump(2) << '\n';
    }
    sink.close();
    dump_chain(f.chain1_path, chain1);
    dump_chain(f.chain2_path, chain2);
}

void cmd_timeline(const TimelineFlags &tf, const std::string &mode_name_flag, std::string strategy_flag,
                  const std::string &events_path, const std::string &out_path, std::ostream &out,
                  std::ostream &err) {
    const auto config = tf.config();
    ControlMode mode = TwoWayFeedback{};
    std::string label = "feedback";
    std::optional<double> chsh_S;
    if (mode_name_flag != "feedback") {
        const bool quantum = mode_name_flag == "quantum";
        if (strategy_flag.empty()) strategy_flag = quantum ? "quantum:corrected" : "det:++++";
        auto s = parse_strategy_flag(strategy_flag, err);
        if (quantum != std::holds_alternative<QuantumStrategy>(s)) {
            throw UsageError("strategy '" + strategy_flag + "' does not match mode '" + mode_name_flag + "'");
        }
        label = format_strategy(s);
        chsh_S = exact_value(s).chsh_S;
        if (quantum) mode = OneWayQuantum{std::move(s)};
        else mode = OneWayClassical{std::move(s)};
    } else if (!strategy_flag.empty()) {
        throw UsageError("feedback mode takes no --strategy");
    }

    Sink sink(out_path, out);
    RandomStream rng(tf.seed);
    const auto sim = run_timeline(config, mode, rng);
    std::optional<double> noncr;
    if (sim.report) noncr = sim.report->noncr_fraction;
    sink.stream() << report_json(label, config.steps, tf.seed, noncr, chsh_S, sim.makespan).dump(2) << '\n';
    sink.close();

    if (!events_path.empty()) {
        std::ofstream f(events_path, std::ios::binary);
        if (!f) throw IoError("cannot open '" + events_path + "' for writing");
        write_event_log(f, sim.events);
        if (!f.flush()) throw IoError("write to '" + events_path + "' failed");
    }
}

std::string optional_fixed9(const std::optional<double> &x) { return x ? fixed9(*x) : "undefined"; }

void cmd_compare(const TimelineFlags &tf, const std::string &out_path, std::ostream &out) {
    const auto config = tf.config();
    const auto cmp = compare_modes(config, tf.seed);
    Sink sink(out_path, out);
    auto &o = sink.stream();
    o << "mode,exact_noncr,empirical_noncr,makespan_s\n";
    char buf[64];
    for (const auto &row : cmp.rows) {
        std::snprintf(buf, sizeof buf, "%.9e", row.makespan);
        o << mode_name(row.mode) << ',' << optional_fixed9(row.exact_noncr) << ','
          << optional_fixed9(row.empirical_noncr) << ',' << buf << '\n';
    }
    o << "quality_ratio," << optional_fixed9(cmp.ratio) << ",,\n";
    sink.close();
}

void cmd_sweep(double from, double to, long long points, const std::string &out_path, std::ostream &out) {
    if (points < 1) throw UsageError("points must be ≥ 1");
    if (!std::isfinite(from) || !std::isfinite(to)) throw UsageError("sweep bounds must be finite");
    Sink sink(out_path, out);
    auto &o = sink.stream();
    o << "theta,chsh_S,noncr\n";
    for (const auto &p : sweep(from, to, static_cast<std::size_t>(points))) {
        o << fixed9(p.theta) << ',' << fixed9(p.chsh_S) << ',' << fixed9(p.noncr) << '\n';
    }
    sink.close();
}

Chain load_chain(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    return read_chain(f);
}

void cmd_overlay(const std::string &p1, const std::string &p2, std::ostream &out) {
    const auto r = overlay(load_chain(p1), load_chain(p2));
    out << "length,noncritical_count,cr_sum,noncr_fraction\n";
    out << r.length << ',' << r.noncritical_count << ',' << r.cr_sum << ',' << fixed9(r.noncr_fraction) << '\n';
}

}  // namespace

std::string fixed9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", round9(x));
    return buf;
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

MeasurementSettings sweep_settings(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {sigma_x(), sigma_z(), observable_from_bloch({c, 0, -s}, "a2"), observable_from_bloch({c, 0, s}, "b2"),
            SettingsVariant::Corrected};
}

SweepPoint sweep_point(double theta) {
    const double s = chsh(BiphotonState::phi_plus(), sweep_settings(theta));
    return {theta, s, noncr_from_chsh(s)};
}

std::vector<SweepPoint> sweep(double from, double to, std::size_t points) {
    std::vector<SweepPoint> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(sweep_point(t));
    }
    return out;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Two-site chain assembly under one-way classical and biphoton control", "biphoton"};
    app.require_subcommand(1);

    std::string settings = "corrected";
    auto *chsh_cmd = app.add_subcommand("chsh", "CHSH value S on |Phi+> for a settings variant");
    chsh_cmd->add_option("--settings", settings)->check(CLI::IsMember({"corrected", "paper-verbatim"}));

    auto *bound_cmd = app.add_subcommand("bound", "Exact values of all 16 deterministic strategies");

    std::string exact_spec = "quantum:corrected";
    auto *exact_cmd = app.add_subcommand("exact", "Exact expected non-critical fraction of a strategy");
    exact_cmd->add_option("--strategy", exact_spec, "strategy spec");

    SimulateFlags sim;
    auto *sim_cmd = app.add_subcommand("simulate", "Monte Carlo assembly of two chains");
    sim_cmd->add_option("--strategy", sim.strategy, "strategy spec")->required();
    sim_cmd->add_option("--steps", sim.steps, "number of steps M")->required();
    sim_cmd->add_option("--seed", sim.seed, "random seed");
    sim_cmd->add_option("--out", sim.out_path, "output file (default stdout)");
    sim_cmd->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}));
    sim_cmd->add_option("--chain1", sim.chain1_path, "write site-1 chain dump");
    sim_cmd->add_option("--chain2", sim.chain2_path, "write site-2 chain dump");

    TimelineFlags tl;
    std::string tl_mode = "quantum", tl_strategy, tl_events, tl_out;
    auto *tl_cmd = app.add_subcommand("timeline", "Discrete-event run of one control mode");
    tl.add_to(*tl_cmd);
    tl_cmd->add_option("--mode", tl_mode)->check(CLI::IsMember({"classical", "quantum", "feedback"}));
    tl_cmd->add_option("--strategy", tl_strategy, "strategy spec for one-way modes");
    tl_cmd->add_option("--events", tl_events, "write per-step event log CSV");
    tl_cmd->add_option("--out", tl_out, "output file (default stdout)");

    TimelineFlags cmp;
    std::string cmp_out;
    auto *cmp_cmd = app.add_subcommand("compare", "Quality and makespan of all three control modes");
    cmp.add_to(*cmp_cmd);
    cmp_cmd->add_option("--out", cmp_out, "output file (default stdout)");

    double sw_from = 0, sw_to = std::numbers::pi / 2;
    long long sw_points = 91;
    std::string sw_out;
    auto *sw_cmd = app.add_subcommand("sweep", "CHSH value along the site-2 angle family");
    sw_cmd->add_option("--from", sw_from, "first angle (rad)");
    sw_cmd->add_option("--to", sw_to, "last angle (rad)");
    sw_cmd->add_option("--points", sw_points, "number of grid points");
    sw_cmd->add_option("--out", sw_out, "output file (default stdout)");

    std::string ov1, ov2;
    auto *ov_cmd = app.add_subcommand("overlay", "Score two chain dump files");
    ov_cmd->add_option("--chain1", ov1)->required();
    ov_cmd->add_option("--chain2", ov2)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (chsh_cmd->parsed()) cmd_chsh(settings, out, err);
        else if (bound_cmd->parsed()) cmd_bound(out);
        else if (exact_cmd->parsed()) cmd_exact(exact_spec, out, err);
        else if (sim_cmd->parsed()) cmd_simulate(sim, out, err);
        else if (tl_cmd->parsed()) cmd_timeline(tl, tl_mode, tl_strategy, tl_events, tl_out, out, err);
        else if (cmp_cmd->parsed()) cmd_compare(cmp, cmp_out, out);
        else if (sw_cmd->parsed()) cmd_sweep(sw_from, sw_to, sw_points, sw_out, out);
        else if (ov_cmd->parsed()) cmd_overlay(ov1, ov2, out);
    } catch (const IoError &e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    out.flush();
    return kOk;
}

}  // namespace biphoton::cli
