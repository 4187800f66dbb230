#include "hrvband/error.hpp"
#include "hrvband/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace hrvband;

namespace {

// "name:lo:hi"
BandSpec parse_band_flag(const std::string& text) {
    std::stringstream ss(text);
    std::string name, lo, hi, rest;
    if (!std::getline(ss, name, ':') || !std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') ||
        std::getline(ss, rest))
        throw ConfigError("band: expected name:lo:hi, got '" + text + "'");
    try {
        return BandSpec{std::stod(lo), std::stod(hi), name};
    } catch (const std::exception&) {
        throw ConfigError("band: bad number in '" + text + "'");
    }
}

struct Flags {
    std::string config_path;
    RunConfig values;
    std::string format, family, artifact_policy, recording_start;
    std::vector<std::string> bands;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

    template <class T>
    void add(CLI::App* app, const std::string& flag, T& slot, std::function<void(RunConfig&)> apply,
             const std::string& help) {
        setters.emplace_back(app->add_option(flag, slot, help), std::move(apply));
    }

    void attach(CLI::App* app, bool analysis) {
        app->add_option("--config", config_path, "JSON config file (flags override it)");
        auto& v = values;
        add(app, "--output-dir", v.output_dir, [this](RunConfig& c) { c.output_dir = values.output_dir; },
            "Output directory");
        add(app, "--b-step", v.b_step, [this](RunConfig& c) { c.b_step = values.b_step; },
            "Spacing of coefficient positions, seconds");
        add(app, "--threads", v.threads, [this](RunConfig& c) { c.threads = values.threads; },
            "Worker threads (0 = automatic)");
        if (!analysis) {
            add(app, "--seed", v.seed, [this](RunConfig& c) { c.seed = values.seed; }, "Random seed");
            return;
        }
        add(app, "--input", v.input, [this](RunConfig& c) { c.input = values.input; }, "Input file");
        add(app, "--format", format, [this](RunConfig& c) { c.format = parse_input_format(format); },
            "peak-times, intervals or uniform");
        add(app, "--band", bands,
            [this](RunConfig& c) {
                c.bands.clear();
                for (const auto& b : bands) c.bands.push_back(parse_band_flag(b));
            },
            "Band as name:lo:hi in Hz (repeatable, replaces the defaults)");
        add(app, "--family", family, [this](RunConfig& c) { c.family = parse_wavelet_family(family); },
            "gabor or daubechies");
        add(app, "--vanishing-moments", v.vanishing_moments,
            [this](RunConfig& c) { c.vanishing_moments = values.vanishing_moments; }, "Daubechies order (2..10)");
        add(app, "--resample-step", v.resample_step, [this](RunConfig& c) { c.resample_step = values.resample_step; },
            "Resampling step, seconds");
        add(app, "--half-width", v.half_width, [this](RunConfig& c) { c.half_width = values.half_width; },
            "Gabor pseudo-support half width L");
        add(app, "--k-max", v.k_max, [this](RunConfig& c) { c.k_max = values.k_max; }, "Largest segment count");
        add(app, "--min-segment-length", v.min_segment_length,
            [this](RunConfig& c) { c.min_segment_length = values.min_segment_length; }, "Minimum segment length");
        add(app, "--stability-fraction", v.stability_fraction,
            [this](RunConfig& c) { c.stability_fraction = values.stability_fraction; },
            "Minimum stability, as a fraction of the K=1 threshold");
        add(app, "--artifact-policy", artifact_policy,
            [this](RunConfig& c) { c.artifact_policy = parse_artifact_policy(artifact_policy); },
            "hold-previous, linear or reject");
        add(app, "--recording-start", recording_start,
            [this](RunConfig& c) { c.recording_start = recording_start; }, "Clock time of sample 0, HH:MM:SS");
        auto* sq = app->add_flag("--squared-modulus", v.squared_modulus, "Segment |W|^2 instead of |W|");
        setters.emplace_back(sq, [this](RunConfig& c) { c.squared_modulus = values.squared_modulus; });
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const auto& [opt, apply] : setters)
            if (opt->count() > 0) apply(c);
        c.validate();
        return c;
    }
};

int report(const std::exception& e) {
    std::cerr << "hrvband: " << e.what() << '\n';
    return exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Band-localized wavelet energy and change-point segmentation of RR-interval series"};
    app.require_subcommand(1);

    Flags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "Transform each band and segment the coefficient modulus");
    analyze_flags.attach(analyze, true);

    Flags synth_flags;
    std::string spec_path;
    auto* synth = app.add_subcommand("synth", "Simulate a locally stationary signal from a spec file");
    synth->add_option("spec", spec_path, "Piecewise spec file")->required();
    synth_flags.attach(synth, false);

    std::string analysis_dir, plot_dir = "plotdata";
    auto* plotdata = app.add_subcommand("plotdata", "Turn analyze outputs into gnuplot data files");
    plotdata->add_option("analysis_dir", analysis_dir, "Directory written by analyze")->required();
    plotdata->add_option("--output-dir", plot_dir, "Directory for the .dat files");

    auto* selftest = app.add_subcommand("selftest", "Quick internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*analyze) {
            const RunConfig config = analyze_flags.resolve();
            const AnalysisResult result = run_analyze(config);
            for (const auto& band : result.bands) {
                std::cout << band.coefficients.band.name << ": " << band.selected.segment_count() << " segment(s)";
                for (std::size_t cp : band.selected.change_points)
                    std::cout << ' ' << band.coefficients.first_index + cp;
                std::cout << '\n';
            }
        } else if (*synth) {
            run_synth(synth_flags.resolve(), spec_path);
        } else if (*plotdata) {
            run_plotdata(analysis_dir, plot_dir);
        } else if (*selftest) {
            bool ok = true;
            for (const auto& line : run_selftest()) {
                std::printf("%s %s: %s\n", line.passed ? "ok  " : "FAIL", line.name.c_str(), line.detail.c_str());
                ok = ok && line.passed;
            }
            return ok ? 0 : 3;
        }
    } catch (const std::exception& e) {
        return report(e);
    }
    return 0;
}
