#pragma once

#include "hrvband/band_wavelets.hpp"
#include "hrvband/rr_series.hpp"
#include "hrvband/segmentation.hpp"
#include "hrvband/synth.hpp"
#include "hrvband/transform.hpp"

#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <vector>

namespace hrvband {

enum class InputFormat { PeakTimes, Intervals, Uniform };

InputFormat parse_input_format(std::string_view name);
std::string to_string(InputFormat format);

/// Every knob of a run. Defaults reproduce the standard two-band analysis.
struct RunConfig {
    std::string input;
    InputFormat format = InputFormat::PeakTimes;
    std::vector<BandSpec> bands{orthosympathetic_band(), parasympathetic_band()};
    WaveletFamily family = WaveletFamily::Gabor;
    int vanishing_moments = 6;
    double resample_step = 0.25;
    double b_step = 1.0;
    double half_width = 3.5;
    std::size_t k_max = 20;
    std::size_t min_segment_length = 10;
    double stability_fraction = kDefaultStabilityFraction;
    ArtifactPolicy artifact_policy = ArtifactPolicy::Linear;
    std::optional<std::string> recording_start;
    bool squared_modulus = false;
    std::string output_dir = "hrvband_out";
    std::uint64_t seed = 1;
    int threads = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// JSON text of the configuration (stable key order).
std::string config_to_json(const RunConfig& config);
/// Overlays the keys present in `json_text` onto `base`. Unknown keys are errors.
RunConfig config_from_json(const std::string& json_text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

struct BandResult {
    FittedWavelet wavelet;
    CoefficientSeries coefficients;
    /// Series handed to the segmentation (modulus or squared modulus, interior positions).
    std::vector<double> segmented;
    PenaltyPath path;
    Segmentation selected;
};

struct AnalysisResult {
    UniformSeries signal;
    std::vector<BandResult> bands;
};

/// Loads, cleans and resamples the configured input.
UniformSeries load_signal(const RunConfig& config);

/// Transform and segmentation for every band, without touching the filesystem.
AnalysisResult analyze_signal(const UniformSeries& signal, const RunConfig& config);

/// Full analyze run: all outputs are rendered first and written only once every
/// band has succeeded, so a failure leaves no partial outputs.
AnalysisResult run_analyze(const RunConfig& config);

/// Writes <output_dir>/synth_signal.csv and synth_truth.txt.
void run_synth(const RunConfig& config, const std::string& spec_path);

/// Reads analyze outputs from `analysis_dir` and writes gnuplot-ready
/// two-column files into `plot_dir`.
void run_plotdata(const std::string& analysis_dir, const std::string& plot_dir);

struct SelfTestLine {
    std::string name;
    bool passed = false;
    std::string detail;
};
std::vector<SelfTestLine> run_selftest();

/// 1 for InputError, 2 for ConfigError, 3 otherwise.
int exit_code_for(const std::exception& error);

}  // namespace hrvband
