#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "portagrad/analysis.hpp"
#include "portagrad/calibration.hpp"
#include "portagrad/corpus.hpp"
#include "portagrad/errors.hpp"
#include "portagrad/synth.hpp"

// Subcommand front end. Machine-readable JSON goes to stdout, human-readable
// diagnostics to stderr. Exit codes: 0 success, 1 usage error, 2 input or
// parse error, 3 analysis failure. The JSON is byte-identical across reruns
// of the same command except for the "timing" key.

namespace {

using nlohmann::ordered_json;
using namespace portagrad;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitAnalysis = 3;

struct CliError {
    int code;
    std::string msg;
};

[[noreturn]] void fail(int code, const std::string& msg) { throw CliError{code, msg}; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void emit(const ordered_json& j) {
    std::fputs(j.dump(2).c_str(), stdout);
    std::fputc('\n', stdout);
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        fail(kExitUsage, what + ": cannot parse number from '" + s + "'");
    }
    if (pos != s.size()) fail(kExitUsage, what + ": trailing characters in '" + s + "'");
    return v;
}

// "a,b" or "a:b" with a mandated separator.
std::pair<double, double> parse_pair(const std::string& s, char sep, const std::string& what) {
    const std::size_t at = s.find(sep);
    if (at == std::string::npos)
        fail(kExitUsage, what + ": expected two values separated by '" + std::string(1, sep) +
                             "', got '" + s + "'");
    return {parse_number(s.substr(0, at), what), parse_number(s.substr(at + 1), what)};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    f.flush();
    if (!f) fail(kExitInput, "cannot write " + path);
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeOpts {
    std::vector<std::string> files;
    double rate = 0.0;
    std::string band = "fundamental";
    std::size_t window = 4096;
    std::size_t hop = 128;
    double time_res = 0.0;
    std::string taper = "hann";
    double fmin = 60.0;
    double fmax = 1400.0;
    std::size_t refine_window = 1024;
    double rel_floor = 6.0;
    double abs_floor = 0.0;
    double max_jump_octaves = 1.0 / 3.0;
    double plateau_tol_cents = 35.0;
    double min_plateau_s = 0.08;
    double min_slide_interval_cents = 70.0;
    double clean_shift_max_s = 0.05;
    double vibrato_rate_min_hz = 4.0;
    bool recover = false;
    double step_db = 3.0;
    double max_gain_db = 15.0;
    double visibility_floor = 0.05;
    double artefact_ratio_max = 0.25;
    std::string pgm_out;
    std::string track_csv_out;
    std::string append_csv;
    std::string performer = "unknown";
    int year = 2000;
    std::string sonata = "other";
    int bar = 1;
    double bpm = 100.0;
    bool fmin_given = false;
    bool fmax_given = false;
};

void add_analyze_options(CLI::App* sub, AnalyzeOpts& o) {
    sub->add_option("files", o.files, "input WAV files (analyzed in order)")->required();
    sub->add_option("--rate", o.rate, "resample to this rate before analysis; 0 keeps native")
        ->capture_default_str();
    sub->add_option("--band", o.band,
                    "analysis band: fundamental (60-1400 Hz) or overtone (3600-11000 Hz)")
        ->check(CLI::IsMember({"fundamental", "overtone"}))
        ->capture_default_str();
    sub->add_option_function<double>(
           "--fmin", [&o](const double& v) { o.fmin = v; o.fmin_given = true; },
           "band low edge in Hz, overrides --band");
    sub->add_option_function<double>(
           "--fmax", [&o](const double& v) { o.fmax = v; o.fmax_given = true; },
           "band high edge in Hz, overrides --band");
    sub->add_option("--window", o.window, "analysis window size in samples (power of two)")
        ->capture_default_str();
    sub->add_option("--hop", o.hop, "hop size in samples")->capture_default_str();
    sub->add_option("--time-res", o.time_res,
                    "seconds per frame; when > 0 it overrides --hop")
        ->capture_default_str();
    sub->add_option("--taper", o.taper, "window taper")
        ->check(CLI::IsMember({"hann", "hamming", "blackman", "rect"}))
        ->capture_default_str();
    sub->add_option("--refine-window", o.refine_window,
                    "window for the boundary-sharpening second pass; 0 disables")
        ->capture_default_str();
    sub->add_option("--rel-floor", o.rel_floor,
                    "voicing floor as a multiple of the frame median magnitude")
        ->capture_default_str();
    sub->add_option("--abs-floor", o.abs_floor, "absolute voicing floor")
        ->capture_default_str();
    sub->add_option("--max-jump-octaves", o.max_jump_octaves,
                    "re-search threshold for frame-to-frame pitch jumps")
        ->capture_default_str();
    sub->add_option("--plateau-tol-cents", o.plateau_tol_cents,
                    "pitch tolerance for plateau membership")
        ->capture_default_str();
    sub->add_option("--min-plateau-s", o.min_plateau_s, "minimum plateau duration")
        ->capture_default_str();
    sub->add_option("--min-slide-interval-cents", o.min_slide_interval_cents,
                    "minimum interval between plateaus to count as a transition")
        ->capture_default_str();
    sub->add_option("--clean-shift-max-s", o.clean_shift_max_s,
                    "voiced spans shorter than this classify as clean shifts")
        ->capture_default_str();
    sub->add_option("--vibrato-rate-min-hz", o.vibrato_rate_min_hz,
                    "slowest vibrato the demodulation median must cover")
        ->capture_default_str();
    sub->add_flag("--recover", o.recover, "sweep gain upward to recover a faint trace");
    sub->add_option("--step-db", o.step_db, "recovery gain step")->capture_default_str();
    sub->add_option("--max-gain-db", o.max_gain_db, "recovery gain cap")->capture_default_str();
    sub->add_option("--visibility-floor", o.visibility_floor,
                    "absolute magnitude a recovered trace must reach")
        ->capture_default_str();
    sub->add_option("--artefact-ratio-max", o.artefact_ratio_max,
                    "highest tolerated fraction of spurious voiced frames")
        ->capture_default_str();
    sub->add_option("--pgm", o.pgm_out, "write the analyzed spectrogram image here");
    sub->add_option("--track-csv", o.track_csv_out, "write the pitch track CSV here");
    sub->add_option("--append-csv", o.append_csv,
                    "append one catalogue row per event to this corpus CSV");
    sub->add_option("--performer", o.performer, "catalogue field for --append-csv")
        ->capture_default_str();
    sub->add_option("--year", o.year, "catalogue field for --append-csv")
        ->capture_default_str();
    sub->add_option("--sonata", o.sonata, "catalogue field for --append-csv")
        ->capture_default_str();
    sub->add_option("--bar", o.bar, "catalogue field for --append-csv")->capture_default_str();
    sub->add_option("--bpm", o.bpm, "catalogue field for --append-csv")->capture_default_str();
}

AnalysisParams build_params(const AnalyzeOpts& o) {
    AnalysisParams ap;
    ap.spectro = o.band == "overtone" ? SpectroConfig::overtone_defaults()
                                      : SpectroConfig::fundamental_defaults();
    ap.spectro.window_size = o.window;
    ap.spectro.hop_size = o.hop;
    ap.spectro.window_kind = parse_window_kind(o.taper);
    ap.spectro.target_time_res = o.time_res;
    if (o.fmin_given) ap.spectro.freq_min = o.fmin;
    if (o.fmax_given) ap.spectro.freq_max = o.fmax;
    ap.track.rel_floor = o.rel_floor;
    ap.track.abs_floor = o.abs_floor;
    ap.track.max_jump_octaves = o.max_jump_octaves;
    ap.segmentation.plateau_tol_cents = o.plateau_tol_cents;
    ap.segmentation.min_plateau_s = o.min_plateau_s;
    ap.segmentation.min_slide_interval_cents = o.min_slide_interval_cents;
    ap.segmentation.clean_shift_max_s = o.clean_shift_max_s;
    ap.segmentation.vibrato_rate_min_hz = o.vibrato_rate_min_hz;
    ap.refine_window = o.refine_window;
    ap.use_recovery = o.recover;
    ap.recovery.step_db = o.step_db;
    ap.recovery.max_gain_db = o.max_gain_db;
    ap.recovery.visibility_floor = o.visibility_floor;
    ap.recovery.artefact_ratio_max = o.artefact_ratio_max;
    return ap;
}

ordered_json config_echo(const AnalyzeOpts& o, const AnalysisParams& ap) {
    return ordered_json{
        {"rate", o.rate},
        {"band", o.band},
        {"fmin", ap.spectro.freq_min},
        {"fmax", ap.spectro.freq_max},
        {"window", ap.spectro.window_size},
        {"hop", ap.spectro.hop_size},
        {"time_res", ap.spectro.target_time_res},
        {"taper", o.taper},
        {"refine_window", ap.refine_window},
        {"rel_floor", ap.track.rel_floor},
        {"abs_floor", ap.track.abs_floor},
        {"max_jump_octaves", ap.track.max_jump_octaves},
        {"plateau_tol_cents", ap.segmentation.plateau_tol_cents},
        {"min_plateau_s", ap.segmentation.min_plateau_s},
        {"min_slide_interval_cents", ap.segmentation.min_slide_interval_cents},
        {"clean_shift_max_s", ap.segmentation.clean_shift_max_s},
        {"vibrato_rate_min_hz", ap.segmentation.vibrato_rate_min_hz},
        {"recover", ap.use_recovery},
        {"step_db", ap.recovery.step_db},
        {"max_gain_db", ap.recovery.max_gain_db},
        {"visibility_floor", ap.recovery.visibility_floor},
        {"artefact_ratio_max", ap.recovery.artefact_ratio_max},
    };
}

ordered_json event_json(const TransitionEvent& ev) {
    return ordered_json{
        {"kind", transition_kind_name(ev.kind)},
        {"onset_s", ev.onset_time},
        {"termination_s", ev.termination_time},
        {"onset_freq_hz", ev.onset_freq},
        {"termination_freq_hz", ev.termination_freq},
        {"delta_f_hz", std::abs(ev.termination_freq - ev.onset_freq)},
        {"duration_s", ev.duration_s},
        {"direction", ev.direction == Direction::ascending ? "ascending" : "descending"},
        {"gradient_hz_per_s", ev.gradient_hz_per_s},
        // Display-equivalent pixel slope on the reference geometry.
        {"gradient_px_per_px", ev.gradient_hz_per_s / reference_calibration().factor},
    };
}

ordered_json recovery_json(const RecoveryResult& rec) {
    ordered_json steps = ordered_json::array();
    for (const RecoveryStepDiag& d : rec.diagnostics)
        steps.push_back(ordered_json{{"gain_db", d.gain_db},
                                     {"voiced_fraction", d.voiced_fraction},
                                     {"spurious_fraction", d.spurious_fraction},
                                     {"events_found", d.events_found}});
    return ordered_json{
        {"recovered", rec.recovered}, {"gain_used_db", rec.gain_used_db}, {"steps", steps}};
}

int cmd_analyze(const AnalyzeOpts& o) {
    if (o.window == 0) fail(kExitUsage, "--window must be positive");
    if (o.hop == 0 && o.time_res <= 0.0) fail(kExitUsage, "--hop must be positive");
    if (o.files.size() > 1 && (!o.pgm_out.empty() || !o.track_csv_out.empty()))
        fail(kExitUsage, "--pgm and --track-csv require a single input file");

    const AnalysisParams ap = build_params(o);
    const ordered_json conf = config_echo(o, ap);

    ordered_json reports = ordered_json::array();
    std::vector<CorpusRecord> new_rows;
    bool recovery_exhausted = false;

    for (const std::string& path : o.files) {
        const auto t0 = Clock::now();
        const SampleBuffer buf = load_audio(path, o.rate);
        AnalysisResult res;
        try {
            res = analyze_buffer(buf, ap);
        } catch (const std::invalid_argument& e) {
            fail(kExitInput, path + ": " + e.what());
        }

        if (!o.pgm_out.empty()) {
            Spectrogram spec = compute_spectrogram(buf, ap.spectro);
            if (res.recovery.has_value()) spec = apply_gain(spec, res.recovery->gain_used_db);
            write_pgm(spec, o.pgm_out);
        }
        if (!o.track_csv_out.empty()) write_track_csv(res.track, o.track_csv_out);

        std::size_t voiced = 0;
        for (const std::uint8_t v : res.track.voiced) voiced += v != 0 ? 1u : 0u;
        std::size_t sliding = 0;
        ordered_json events = ordered_json::array();
        for (const TransitionEvent& ev : res.events) {
            events.push_back(event_json(ev));
            if (ev.kind == TransitionKind::sliding) ++sliding;
        }

        ordered_json report{
            {"input", path},
            {"config", conf},
            {"audio", ordered_json{{"sample_rate", buf.sample_rate},
                                   {"duration_s", buf.duration_s()}}},
            {"track",
             ordered_json{{"n_frames", res.track.size()},
                          {"voiced_fraction",
                           res.track.size() > 0
                               ? static_cast<double>(voiced) /
                                     static_cast<double>(res.track.size())
                               : 0.0},
                          {"n_plateaus", res.plateaus.size()}}},
            {"events", events},
        };
        if (res.recovery.has_value()) {
            report["recovery"] = recovery_json(*res.recovery);
            if (!res.recovery->recovered) {
                recovery_exhausted = true;
                std::fprintf(stderr, "%s: recovery exhausted at %g dB without a usable trace\n",
                             path.c_str(), res.recovery->gain_used_db);
            }
        }
        report["timing"] = ordered_json{{"seconds", seconds_since(t0)}};
        reports.push_back(std::move(report));

        std::fprintf(stderr, "%s: %zu event%s (%zu sliding)\n", path.c_str(),
                     res.events.size(), res.events.size() == 1 ? "" : "s", sliding);

        for (const TransitionEvent& ev : res.events) {
            CorpusRecord row;
            row.performer = o.performer;
            row.year = o.year;
            row.sonata = Sonata::parse(o.sonata);
            row.bar = o.bar;
            row.kind = ev.kind;
            row.gradient_hz_s = ev.gradient_hz_per_s;
            row.gradient_px = ev.gradient_hz_per_s / reference_calibration().factor;
            row.duration_s = ev.duration_s;
            row.bpm = o.bpm;
            new_rows.push_back(std::move(row));
        }
    }

    if (!o.append_csv.empty()) {
        for (const CorpusRecord& row : new_rows) {
            const std::string reason = validate_record(row);
            if (!reason.empty()) fail(kExitUsage, "cannot append to catalogue: " + reason);
        }
        std::vector<CorpusRecord> all;
        if (std::filesystem::exists(o.append_csv)) all = load_corpus(o.append_csv);
        all.insert(all.end(), new_rows.begin(), new_rows.end());
        save_corpus(all, o.append_csv);
        std::fprintf(stderr, "appended %zu row%s to %s\n", new_rows.size(),
                     new_rows.size() == 1 ? "" : "s", o.append_csv.c_str());
    }

    emit(o.files.size() == 1 ? reports[0] : reports);
    return recovery_exhausted ? kExitAnalysis : kExitOk;
}

// ---------------------------------------------------------------- measure --

struct MeasureOpts {
    std::string p1;
    std::string p2;
    std::string range = "0:7400";
    double height = 800.0;
    double width = 1200.0;
    double window_s = 5.0;
};

int cmd_measure(const MeasureOpts& o) {
    const auto [fmin, fmax] = parse_pair(o.range, ':', "--range");
    CalibrationParams cal;
    try {
        cal = make_calibration(fmin, fmax, o.height, o.width, o.window_s);
    } catch (const std::invalid_argument& e) {
        fail(kExitUsage, e.what());
    }
    const auto [x1, y1] = parse_pair(o.p1, ',', "--p1");
    const auto [x2, y2] = parse_pair(o.p2, ',', "--p2");
    if (x2 <= x1) fail(kExitUsage, "delta x must be positive: --p2 x must exceed --p1 x");

    const PixelMeasurement m = measure_from_pixels({x1, y1}, {x2, y2}, cal);
    std::fprintf(stderr, "gradient %g Hz/s over %g s (delta f %g Hz, %g px/px)\n",
                 m.gradient_hz_per_s, m.duration_s, m.delta_f_hz, m.gradient_px);
    emit(ordered_json{
        {"p1", ordered_json{{"x", x1}, {"y", y1}}},
        {"p2", ordered_json{{"x", x2}, {"y", y2}}},
        {"config", ordered_json{{"range_min_hz", fmin},
                                {"range_max_hz", fmax},
                                {"height", o.height},
                                {"width", o.width},
                                {"window", o.window_s},
                                {"hz_per_px", cal.hz_per_px},
                                {"px_per_second", cal.px_per_second},
                                {"factor", cal.factor}}},
        {"gradient_px_per_px", m.gradient_px},
        {"gradient_hz_per_s", m.gradient_hz_per_s},
        {"delta_f_hz", m.delta_f_hz},
        {"duration_s", m.duration_s},
    });
    return kExitOk;
}

// ------------------------------------------------------------------ synth --

struct SynthOpts {
    bool step = false;
    double f_start = 220.0;
    double f_end = 261.6;
    double pre_hold = 0.5;
    double glide = 0.2;
    double post_hold = 0.5;
    double gap = 0.03;
    double hold = 0.5;
    int harmonics = 4;
    double rolloff_db = 6.0;
    double vibrato_cents = 0.0;
    double vibrato_rate = 5.5;
    double snr_db = std::numeric_limits<double>::infinity();
    double rate = 44100.0;
    double amplitude = 0.8;
    std::uint64_t seed = 1;
    bool cents_linear = false;
    std::string out;
    std::string encoding = "pcm16";
};

int cmd_synth(const SynthOpts& o) {
    const WavEncoding enc =
        o.encoding == "float32" ? WavEncoding::float32 : WavEncoding::pcm16;
    SampleBuffer buf;
    ordered_json truth;
    ordered_json conf{
        {"step", o.step},         {"harmonics", o.harmonics},
        {"rolloff_db", o.rolloff_db}, {"snr_db", o.snr_db},
        {"rate", o.rate},         {"amplitude", o.amplitude},
        {"seed", o.seed},         {"encoding", o.encoding},
    };
    if (o.step) {
        StepSpec spec;
        spec.f1_hz = o.f_start;
        spec.f2_hz = o.f_end;
        spec.gap_s = o.gap;
        spec.hold_s = o.hold;
        spec.n_harmonics = o.harmonics;
        spec.harmonic_rolloff_db = o.rolloff_db;
        spec.snr_db = o.snr_db;
        spec.sample_rate = o.rate;
        spec.amplitude = o.amplitude;
        spec.noise_seed = o.seed;
        auto [b, t] = synth_step(spec);
        buf = std::move(b);
        truth = ordered_json{{"kind", transition_kind_name(t.kind)},
                             {"gap_s", t.gap_s},
                             {"shift_time_s", t.shift_time_s}};
        conf["f_start"] = o.f_start;
        conf["f_end"] = o.f_end;
        conf["gap"] = o.gap;
        conf["hold"] = o.hold;
    } else {
        GlideSpec spec;
        spec.f_start_hz = o.f_start;
        spec.f_end_hz = o.f_end;
        spec.pre_hold_s = o.pre_hold;
        spec.glide_s = o.glide;
        spec.post_hold_s = o.post_hold;
        spec.n_harmonics = o.harmonics;
        spec.harmonic_rolloff_db = o.rolloff_db;
        spec.vibrato_cents = o.vibrato_cents;
        spec.vibrato_rate_hz = o.vibrato_rate;
        spec.snr_db = o.snr_db;
        spec.sample_rate = o.rate;
        spec.amplitude = o.amplitude;
        spec.noise_seed = o.seed;
        spec.cents_linear = o.cents_linear;
        auto [b, t] = synth_glide(spec);
        buf = std::move(b);
        truth = ordered_json{{"kind", "sliding"},
                             {"gradient_hz_per_s", t.gradient_hz_per_s},
                             {"onset_s", t.onset_s},
                             {"termination_s", t.termination_s},
                             {"delta_f_hz", t.delta_f_hz}};
        conf["f_start"] = o.f_start;
        conf["f_end"] = o.f_end;
        conf["pre_hold"] = o.pre_hold;
        conf["glide"] = o.glide;
        conf["post_hold"] = o.post_hold;
        conf["vibrato_cents"] = o.vibrato_cents;
        conf["vibrato_rate"] = o.vibrato_rate;
        conf["cents_linear"] = o.cents_linear;
    }

    save_wav(o.out, buf, enc);
    const std::string sidecar = o.out + ".truth.json";
    write_text_file(sidecar, truth.dump(2) + "\n");
    std::fprintf(stderr, "wrote %s (%.3f s at %g Hz) and %s\n", o.out.c_str(),
                 buf.duration_s(), buf.sample_rate, sidecar.c_str());
    emit(ordered_json{{"wav", o.out},
                      {"sidecar", sidecar},
                      {"mode", o.step ? "step" : "glide"},
                      {"config", conf},
                      {"truth", truth}});
    return kExitOk;
}

// ------------------------------------------------------------ regress/era --

std::vector<EraBounds> parse_bins(const std::string& s) {
    std::vector<EraBounds> bounds;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(',', start);
        if (end == std::string::npos) end = s.size();
        const auto [a, b] = parse_pair(s.substr(start, end - start), ':', "--bins");
        bounds.push_back({static_cast<int>(a), static_cast<int>(b)});
        start = end + 1;
    }
    return bounds;
}

ordered_json era_rows_json(const std::vector<EraSummary>& eras) {
    ordered_json rows = ordered_json::array();
    for (const EraSummary& e : eras)
        rows.push_back(ordered_json{{"era", e.label},
                                    {"n", e.n},
                                    {"min_gradient", e.min_gradient},
                                    {"max_gradient", e.max_gradient},
                                    {"mean_gradient", e.mean_gradient}});
    return rows;
}

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Dependency-free scatter plot: points plus the fitted line.
std::string scatter_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                        const RegressionResult& fit, const std::string& x_label) {
    const double kw = 640.0, kh = 480.0, ml = 64.0, mr = 20.0, mt = 20.0, mb = 48.0;
    double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
    for (const double x : xs) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
    for (const double y : ys) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
    if (xmax == xmin) { xmin -= 1.0; xmax += 1.0; }
    if (ymax == ymin) { ymin -= 1.0; ymax += 1.0; }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (kw - ml - mr); };
    const auto py = [&](double y) { return kh - mb - (y - ymin) / (ymax - ymin) * (kh - mt - mb); };

    std::ostringstream svg;
    char buf[256];
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\">\n"
        << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  ml, kh - mb, kw - mr, kh - mb);
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  ml, mt, ml, kh - mb);
    svg << buf;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#27618f\"/>\n",
                      px(xs[i]), py(ys[i]));
        svg << buf;
    }
    const double fy1 = fit.intercept + fit.slope * xmin;
    const double fy2 = fit.intercept + fit.slope * xmax;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#b03030\" "
                  "stroke-width=\"1.5\"/>\n",
                  px(xmin), py(fy1), px(xmax), py(fy2));
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  (ml + kw - mr) / 2.0, kh - 12.0, x_label.c_str());
    svg << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\" transform=\"rotate(-90 14 %.2f)\">gradient (Hz/s)"
                  "</text>\n",
                  14.0, (mt + kh - mb) / 2.0, (mt + kh - mb) / 2.0);
    svg << buf;
    const struct { double x, y; std::string t; bool xaxis; } ticks[] = {
        {xmin + xpad, 0.0, format_num(xmin + xpad), true},
        {xmax - xpad, 0.0, format_num(xmax - xpad), true},
        {0.0, ymin + ypad, format_num(ymin + ypad), false},
        {0.0, ymax - ypad, format_num(ymax - ypad), false},
    };
    for (const auto& tk : ticks) {
        if (tk.xaxis)
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
                          "font-size=\"11\" text-anchor=\"middle\">%s</text>\n",
                          px(tk.x), kh - mb + 16.0, tk.t.c_str());
        else
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
                          "font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                          ml - 6.0, py(tk.y) + 4.0, tk.t.c_str());
        svg << buf;
    }
    svg << "</svg>\n";
    return svg.str();
}

struct RegressOpts {
    std::string csv;
    std::string mode = "tempo";
    std::string plot_csv;
    std::string svg;
    bool era = false;
    std::string bins;
    bool include_empty = false;
};

int cmd_regress(const RegressOpts& o) {
    const auto t0 = Clock::now();
    const std::vector<CorpusRecord> records = load_corpus(o.csv);

    std::vector<double> xs, ys;
    for (const CorpusRecord& r : records) {
        if (r.kind != TransitionKind::sliding || r.gradient_hz_s <= 0.0) continue;
        xs.push_back(o.mode == "tempo" ? r.bpm : static_cast<double>(r.year));
        ys.push_back(r.gradient_hz_s);
    }
    if (xs.size() < 2)
        fail(kExitAnalysis, "no portamento-present subset in " + o.csv + " (" +
                                std::to_string(xs.size()) +
                                " sliding records with positive gradient; need at least 2)");

    TrendResult trend;
    try {
        trend = o.mode == "tempo" ? gradient_vs_tempo(records) : gradient_vs_year(records);
    } catch (const std::invalid_argument& e) {
        fail(kExitAnalysis, std::string(e.what()) + " in " + o.csv);
    }

    const std::string x_name = o.mode == "tempo" ? "bpm" : "year";
    if (!o.plot_csv.empty()) {
        std::ostringstream out;
        out << x_name << ",gradient_hz_s\n";
        for (std::size_t i = 0; i < xs.size(); ++i)
            out << format_num(xs[i]) << "," << format_num(ys[i]) << "\n";
        write_text_file(o.plot_csv, out.str());
    }
    if (!o.svg.empty())
        write_text_file(o.svg, scatter_svg(xs, ys, trend.regression,
                                           o.mode == "tempo" ? "tempo (BPM)" : "year"));

    ordered_json zero_counts = ordered_json::object();
    for (const auto& [bucket, count] : trend.zero_counts)
        zero_counts[std::to_string(bucket)] = count;

    ordered_json report{
        {"input", o.csv},
        {"mode", o.mode},
        {"config", ordered_json{{"bins", o.bins}, {"include_empty", o.include_empty}}},
        {"n_records", records.size()},
        {"regression", ordered_json{{"slope", trend.regression.slope},
                                    {"intercept", trend.regression.intercept},
                                    {"r_squared", trend.regression.r_squared},
                                    {"n", trend.regression.n}}},
        {"zero_excluded", trend.zero_excluded},
        {"zero_counts", zero_counts},
    };
    if (o.era) {
        std::vector<EraSummary> eras;
        try {
            eras = era_summary(records, o.bins.empty() ? default_era_bounds() : parse_bins(o.bins),
                               o.include_empty);
        } catch (const std::invalid_argument& e) {
            fail(kExitUsage, e.what());
        }
        report["era_summary"] = era_rows_json(eras);
    }
    report["timing"] = ordered_json{{"seconds", seconds_since(t0)}};

    std::fprintf(stderr, "%s fit over %zu records: slope %g, intercept %g, r^2 %g\n",
                 x_name.c_str(), trend.regression.n, trend.regression.slope,
                 trend.regression.intercept, trend.regression.r_squared);
    emit(report);
    return kExitOk;
}

struct EraOpts {
    std::string csv;
    std::string bins;
    bool include_empty = false;
};

int cmd_era(const EraOpts& o) {
    const auto t0 = Clock::now();
    const std::vector<CorpusRecord> records = load_corpus(o.csv);
    std::vector<EraSummary> eras;
    try {
        eras = era_summary(records, o.bins.empty() ? default_era_bounds() : parse_bins(o.bins),
                           o.include_empty);
    } catch (const std::invalid_argument& e) {
        fail(kExitUsage, e.what());
    }
    for (const EraSummary& e : eras)
        std::fprintf(stderr, "era %s: n=%zu min=%g max=%g mean=%g\n", e.label.c_str(), e.n,
                     e.min_gradient, e.max_gradient, e.mean_gradient);
    emit(ordered_json{
        {"input", o.csv},
        {"config", ordered_json{{"bins", o.bins}, {"include_empty", o.include_empty}}},
        {"eras", era_rows_json(eras)},
        {"timing", ordered_json{{"seconds", seconds_since(t0)}}},
    });
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"portamento gradient measurement toolkit"};
    app.require_subcommand(1);
    const char* config_env = std::getenv("PORTAGRAD_CONFIG");
    app.set_config("--config", config_env != nullptr ? config_env : "",
                   "flat key=value config file; PORTAGRAD_CONFIG overrides the default path");

    AnalyzeOpts ao;
    CLI::App* analyze =
        app.add_subcommand("analyze", "detect and measure pitch transitions in WAV files");
    add_analyze_options(analyze, ao);
    CLI::App* recover =
        app.add_subcommand("recover", "analyze with the gain-sweep recovery enabled");
    add_analyze_options(recover, ao);

    MeasureOpts mo;
    CLI::App* measure =
        app.add_subcommand("measure", "calibrate a gradient from two spectrogram pixels");
    measure->add_option("--p1", mo.p1, "first point as x,y (y grows downward)")->required();
    measure->add_option("--p2", mo.p2, "second point as x,y")->required();
    measure->add_option("--range", mo.range, "display band as min:max Hz")
        ->capture_default_str();
    measure->add_option("--height", mo.height, "display height in px")->capture_default_str();
    measure->add_option("--width", mo.width, "display width in px")->capture_default_str();
    measure->add_option("--window", mo.window_s, "seconds of audio spanned by the width")
        ->capture_default_str();

    SynthOpts so;
    CLI::App* synth =
        app.add_subcommand("synth", "write a synthetic test tone WAV with a ground-truth sidecar");
    synth->add_flag("--step", so.step, "two held notes with a silent gap instead of a glide");
    synth->add_option("--f-start", so.f_start, "start frequency in Hz")->capture_default_str();
    synth->add_option("--f-end", so.f_end, "end frequency in Hz")->capture_default_str();
    synth->add_option("--pre-hold", so.pre_hold, "seconds held before the glide")
        ->capture_default_str();
    synth->add_option("--glide", so.glide, "glide duration in seconds")->capture_default_str();
    synth->add_option("--post-hold", so.post_hold, "seconds held after the glide")
        ->capture_default_str();
    synth->add_option("--gap", so.gap, "silent gap between the step notes")
        ->capture_default_str();
    synth->add_option("--hold", so.hold, "duration of each step note")->capture_default_str();
    synth->add_option("--harmonics", so.harmonics, "number of partials including fundamental")
        ->capture_default_str();
    synth->add_option("--rolloff-db", so.rolloff_db, "level drop per partial")
        ->capture_default_str();
    synth->add_option("--vibrato-cents", so.vibrato_cents, "peak vibrato deviation")
        ->capture_default_str();
    synth->add_option("--vibrato-rate", so.vibrato_rate, "vibrato rate in Hz")
        ->capture_default_str();
    synth->add_option("--snr-db", so.snr_db, "signal-to-noise ratio; inf disables noise")
        ->capture_default_str();
    synth->add_option("--rate", so.rate, "sample rate")->capture_default_str();
    synth->add_option("--amplitude", so.amplitude, "peak amplitude of the noiseless signal")
        ->capture_default_str();
    synth->add_option("--seed", so.seed, "noise generator seed")->capture_default_str();
    synth->add_flag("--cents-linear", so.cents_linear,
                    "sweep linearly in cents instead of Hz");
    synth->add_option("--encoding", so.encoding, "WAV sample format")
        ->check(CLI::IsMember({"pcm16", "float32"}))
        ->capture_default_str();
    synth->add_option("--out", so.out, "output WAV path")->required();

    RegressOpts ro;
    CLI::App* regress =
        app.add_subcommand("regress", "fit gradient against tempo or year over a catalogue CSV");
    regress->add_option("csv", ro.csv, "catalogue CSV path")->required();
    regress->add_option("--mode", ro.mode, "regressor: tempo or year")
        ->check(CLI::IsMember({"tempo", "year"}))
        ->capture_default_str();
    regress->add_option("--plot-csv", ro.plot_csv, "write x,gradient rows here for plotting");
    regress->add_option("--svg", ro.svg, "write a scatter plot with the fitted line here");
    regress->add_flag("--era-summary", ro.era, "include per-era gradient statistics");
    regress->add_option("--bins", ro.bins, "era bins as start:end[,start:end...]");
    regress->add_flag("--include-empty", ro.include_empty, "keep eras with no records");

    EraOpts eo;
    CLI::App* era = app.add_subcommand("era", "per-era gradient statistics from a catalogue CSV");
    era->add_option("csv", eo.csv, "catalogue CSV path")->required();
    era->add_option("--bins", eo.bins, "era bins as start:end[,start:end...]");
    era->add_flag("--include-empty", eo.include_empty, "keep eras with no records");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(ao);
        if (recover->parsed()) {
            ao.recover = true;
            return cmd_analyze(ao);
        }
        if (measure->parsed()) return cmd_measure(mo);
        if (synth->parsed()) return cmd_synth(so);
        if (regress->parsed()) return cmd_regress(ro);
        if (era->parsed()) return cmd_era(eo);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.msg.c_str());
        return e.code;
    } catch (const IngestError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const CorpusError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAnalysis;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAnalysis;
    }
    return kExitOk;
}
