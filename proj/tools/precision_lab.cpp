// precision-lab: command-line front end for the rotation, Lorenz and
// digit-agreement experiments. Output is CSV with shortest round-trip numbers.
//
// Exit codes: 0 success, 2 diverged run (output still written),
// 64 usage or configuration error, 74 I/O failure.

#include <algorithm>
#include <array>
#include <iomanip>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config_file.hpp"
#include "plab/errors.hpp"
#include "plab/lorenz.hpp"
#include "plab/parallel.hpp"
#include "plab/precision.hpp"
#include "plab/qc.hpp"
#include "plab/rotation.hpp"

namespace {

using namespace plab;

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string num(std::int64_t v) { return std::to_string(v); }

// Writes to stdout for "-", otherwise to the named file.
class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (path_ != "-") {
            file_ = std::make_unique<std::ofstream>(path_, std::ios::binary | std::ios::trunc);
            if (!*file_) throw IoError("cannot open '" + path_ + "' for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void finish() {
        stream().flush();
        if (!stream()) throw IoError("write to '" + path_ + "' failed");
    }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
}

struct RotateOptions {
    double theta_deg = 5.0;
    std::int64_t steps = 288;
    std::string digits = "native";
    std::string mode = "step";
    std::int64_t record_every = 1;
    std::string tie = "half-away";
    std::string out = "-";
    std::string gnuplot_script;
};

struct LorenzOptions {
    std::string digits_a = "native";
    std::string digits_b = "7";
    double h = 0.01;
    double t_max = 50.0;
    double threshold = 1.0;
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double x0 = 1.0;
    double y0 = 1.0;
    double z0 = 1.0;
    std::int64_t sample_every = 1;
    std::optional<int> restart_truncate;
    std::optional<double> restart_at;
    std::string tie = "half-away";
    std::string out = "-";
    std::string gnuplot_script;
};

struct TableOptions {
    std::string digits_list = "native,12,7";
    double theta_deg = 5.0;
    std::int64_t steps = 288;
    std::string tie = "half-away";
    std::string format = "text";
    std::string out = "-";
};

std::vector<PrecisionSpec> parse_digits_list(const std::string& list) {
    std::vector<PrecisionSpec> specs;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        specs.push_back(PrecisionSpec::parse(item));
    }
    if (specs.empty()) throw ParameterError("--digits-list is empty");
    return specs;
}

std::string gnuplot_rotation(const std::string& csv) {
    return "# companion plot for " + csv +
           "\n"
           "set datafile separator comma\n"
           "set datafile commentschars '#'\n"
           "set xlabel 'k'\n"
           "set ylabel 'norm drift'\n"
           "set grid\n"
           "plot '" + csv + "' using 1:5 skip 1 with linespoints title 'norm_drift'\n";
}

std::string gnuplot_lorenz(const std::string& csv) {
    return "# companion plot for " + csv +
           "\n"
           "set datafile separator comma\n"
           "set datafile commentschars '#'\n"
           "set xlabel 't'\n"
           "set ylabel 'separation'\n"
           "set logscale y\n"
           "set grid\n"
           "plot '" + csv + "' using 1:2 skip 1 with lines title 'sep'\n";
}

void require_script_target(const std::string& script, const std::string& out) {
    if (!script.empty() && out == "-")
        throw ParameterError("--gnuplot-script needs --out to name the CSV file");
}

int cmd_rotate(const RotateOptions& o) {
    require_script_target(o.gnuplot_script, o.out);
    RotationExperimentConfig c;
    c.theta_deg = o.theta_deg;
    c.steps = o.steps;
    c.policy = {PrecisionSpec::parse(o.digits), parse_tie_rule(o.tie)};
    c.mode = o.mode == "square" ? RotationMode::Squaring : RotationMode::Stepwise;
    c.record_every = o.record_every;
    c.validate();

    const bool squaring = c.mode == RotationMode::Squaring;
    Output out(o.out);
    std::ostream& os = out.stream();
    os << "k,x,y,norm,norm_drift,phase_deg,phase_error_deg" << (squaring ? ",det_drift" : "") << '\n';
    const auto row = [&](const TrajectoryRecord& r) {
        os << num(r.k) << ',' << num(r.v.x) << ',' << num(r.v.y) << ',' << num(r.norm) << ','
           << num(r.norm_drift) << ',' << num(r.phase_deg) << ',' << num(r.phase_error_deg);
        if (squaring) os << ',' << num(r.det_drift);
        os << '\n';
    };

    int code = kExitOk;
    try {
        const RunOutcome outcome = run_rotation(c, row);
        if (outcome.diverged) {
            os << "# diverged at k=" << outcome.final_k
               << (outcome.terminated_early ? " (next state not finite)" : "") << '\n';
            code = kExitDiverged;
        }
    } catch (const StepRangeError& e) {
        os << "# diverged at k=" << e.step() << " (state overflow)\n";
        code = kExitDiverged;
    }
    out.finish();
    if (!o.gnuplot_script.empty()) write_text_file(o.gnuplot_script, gnuplot_rotation(o.out));
    return code;
}

int cmd_lorenz(const LorenzOptions& o) {
    require_script_target(o.gnuplot_script, o.out);
    const TieRule tie = parse_tie_rule(o.tie);
    TwinConfig c;
    c.s0 = {o.x0, o.y0, o.z0, 0.0};
    c.params = {o.sigma, o.rho, o.beta};
    c.h = o.h;
    c.t_max = o.t_max;
    c.policy_a = {PrecisionSpec::parse(o.digits_a), tie};
    c.policy_b = {PrecisionSpec::parse(o.digits_b), tie};
    c.threshold = o.threshold;
    c.sample_every = o.sample_every;
    if (o.restart_truncate)
        c.restart = RestartTruncation{*o.restart_truncate, o.restart_at.value_or(o.t_max / 2.0)};

    const DivergenceReport report = run_twin(c);
    Output out(o.out);
    std::ostream& os = out.stream();
    os << "t,sep,agreed_digits\n";
    for (const auto& s : report.samples)
        os << num(s.t) << ',' << num(s.separation) << ',' << num(agreed_digits(s.a, s.b)) << '\n';
    os << "# divergence_time=" << (report.divergence_time ? num(*report.divergence_time) : "NA")
       << ",efolding=" << (report.efolding_estimate ? num(*report.efolding_estimate) : "NA")
       << '\n';
    if (report.truncated) os << "# diverged at t=" << num(report.samples.back().t) << " (state not finite)\n";
    out.finish();
    if (!o.gnuplot_script.empty()) write_text_file(o.gnuplot_script, gnuplot_lorenz(o.out));
    return report.truncated ? kExitDiverged : kExitOk;
}

int cmd_table(const TableOptions& o) {
    const auto specs = parse_digits_list(o.digits_list);
    RotationExperimentConfig base;
    base.theta_deg = o.theta_deg;
    base.steps = o.steps;
    base.record_every = std::max<std::int64_t>(o.steps, 1);
    base.policy.tie_rule = parse_tie_rule(o.tie);
    base.validate();

    struct Row {
        double norm = 1.0;
        double norm_drift = 0.0;
        bool diverged = false;
    };
    const auto rows = parallel_map(specs.size(), [&](std::size_t i) {
        RotationExperimentConfig c = base;
        c.policy.spec = specs[i];
        Row row;
        try {
            run_rotation(c, [&](const TrajectoryRecord& r) {
                row.norm = r.norm;
                row.norm_drift = r.norm_drift;
                row.diverged = r.diverged;
            });
        } catch (const StepRangeError&) {
            row.norm = row.norm_drift = HUGE_VAL;
            row.diverged = true;
        }
        return row;
    });

    // Highest nominal precision is the reference; the first listed wins ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < specs.size(); ++i)
        if (specs[i].nominal_digits() > specs[best].nominal_digits()) best = i;

    Output out(o.out);
    std::ostream& os = out.stream();
    const bool csv = o.format == "csv";
    std::vector<std::array<std::string, 3>> cells;
    cells.push_back({"precision", "norm_drift", "agreed_digits"});
    bool any_diverged = false;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const bool finite = std::isfinite(rows[i].norm) && std::isfinite(rows[best].norm);
        cells.push_back({specs[i].label(), num(rows[i].norm_drift),
                         finite ? num(agreed_digits(rows[best].norm, rows[i].norm)) : "NA"});
        any_diverged = any_diverged || rows[i].diverged;
    }
    if (csv) {
        for (const auto& c : cells) os << c[0] << ',' << c[1] << ',' << c[2] << '\n';
    } else {
        std::array<std::size_t, 3> width{};
        for (const auto& c : cells)
            for (std::size_t j = 0; j < 3; ++j) width[j] = std::max(width[j], c[j].size());
        for (const auto& c : cells) {
            os << std::left << std::setw(static_cast<int>(width[0] + 2)) << c[0]
               << std::setw(static_cast<int>(width[1] + 2)) << c[1] << c[2] << '\n';
        }
        os << "# theta_deg=" << num(o.theta_deg) << " steps=" << o.steps
           << " reference=" << specs[best].label() << '\n';
    }
    out.finish();
    return any_diverged ? kExitDiverged : kExitOk;
}

std::string option_name(const std::string& key) {
    std::string name = "--" + key;
    std::replace(name.begin(), name.end(), '_', '-');
    return name;
}

// File values fill options the command line left unset.
void apply_config(CLI::App& sub, const cli::ConfigValues& values,
                  std::initializer_list<const char*> sections) {
    for (const char* section : sections) {
        const auto it = values.find(section);
        if (it == values.end()) continue;
        for (const auto& [key, value] : it->second) {
            CLI::Option* opt = sub.get_option_no_throw(option_name(key));
            if (opt == nullptr || opt->count() > 0) continue;
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rounding-error experiments: plane rotations, the Lorenz flow and digit agreement.",
                 "precision-lab"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.footer(
        "Exit codes: 0 ok, 2 diverged run (output still written), 64 usage error, 74 I/O error.\n"
        "PRECISION_LAB_THREADS caps parallel runs (0 = serial).");

    std::string config_path;
    app.add_option("--config", config_path,
                   "Experiment file with [rotation], [lorenz], [qc], [output] sections; flags win");

    const auto digits_help =
        "Precision: native, extended, n (1-17 significant digits) or p<k> (k decimal places)";
    const auto tie_check = CLI::IsMember({"half-away", "half-even"});

    RotateOptions ro;
    CLI::App* rotate = app.add_subcommand("rotate", "Iterate a plane rotation and write the trajectory");
    rotate->add_option("--theta-deg", ro.theta_deg, "Rotation angle in degrees");
    rotate->add_option("--steps", ro.steps, "Number of steps (squaring mode: at most 60)");
    rotate->add_option("--digits", ro.digits, digits_help);
    rotate->add_option("--mode", ro.mode, "step: v <- R v; square: R <- R^2 cascade")
        ->check(CLI::IsMember({"step", "square"}));
    rotate->add_option("--record-every", ro.record_every, "Row stride; the final step is always written");
    rotate->add_option("--tie", ro.tie, "Decimal tie rule")->check(tie_check);
    rotate->add_option("--out", ro.out, "CSV path, - for stdout");
    rotate->add_option("--gnuplot-script", ro.gnuplot_script, "Also write a gnuplot script (needs --out)");

    LorenzOptions lo;
    CLI::App* lorenz = app.add_subcommand("lorenz", "Twin Lorenz runs at two precisions; separation CSV");
    // --h is the step size here, so help is long-form only.
    lorenz->set_help_flag("--help", "Print this help message and exit");
    lorenz->add_option("--digits-a", lo.digits_a, digits_help);
    lorenz->add_option("--digits-b", lo.digits_b, "Precision of the second trajectory");
    lorenz->add_option("--h", lo.h, "RK4 step size");
    lorenz->add_option("--t-max", lo.t_max, "End time");
    lorenz->add_option("--threshold", lo.threshold, "Separation that counts as diverged");
    lorenz->add_option("--sigma", lo.sigma, "Lorenz sigma");
    lorenz->add_option("--rho", lo.rho, "Lorenz rho");
    lorenz->add_option("--beta", lo.beta, "Lorenz beta (8/3)");
    lorenz->add_option("--x0", lo.x0, "Initial x");
    lorenz->add_option("--y0", lo.y0, "Initial y");
    lorenz->add_option("--z0", lo.z0, "Initial z");
    lorenz->add_option("--sample-every", lo.sample_every, "Row stride in steps");
    lorenz->add_option("--restart-truncate", lo.restart_truncate,
                       "Truncate trajectory b once to this many significant digits (default: off)")
        ->check(CLI::Range(1, 17));
    lorenz->add_option("--restart-at", lo.restart_at, "Time of the truncation (default: t_max/2)");
    lorenz->add_option("--tie", lo.tie, "Decimal tie rule")->check(tie_check);
    lorenz->add_option("--out", lo.out, "CSV path, - for stdout");
    lorenz->add_option("--gnuplot-script", lo.gnuplot_script, "Also write a gnuplot script (needs --out)");

    TableOptions to;
    CLI::App* table = app.add_subcommand("table", "Norm drift per precision after a stepwise rotation run");
    table->add_option("--digits-list", to.digits_list, "Comma-separated precisions");
    table->add_option("--theta-deg", to.theta_deg, "Rotation angle in degrees");
    table->add_option("--steps", to.steps, "Number of steps");
    table->add_option("--tie", to.tie, "Decimal tie rule")->check(tie_check);
    table->add_option("--format", to.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    table->add_option("--out", to.out, "Output path, - for stdout");

    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            const cli::ConfigValues values = cli::load_config(config_path);
            if (rotate->parsed()) apply_config(*rotate, values, {"rotation", "output"});
            if (lorenz->parsed()) apply_config(*lorenz, values, {"lorenz", "output"});
            if (table->parsed()) apply_config(*table, values, {"rotation", "qc", "output"});
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (rotate->parsed()) return cmd_rotate(ro);
        if (lorenz->parsed()) return cmd_lorenz(lo);
        return cmd_table(to);
    } catch (const IoError& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitIo;
    } catch (const ParameterError& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "precision-lab: " << e.what() << '\n';
        return kExitDiverged;
    }
}
