#include "hrvband/pipeline.hpp"

#include "hrvband/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <sstream>

namespace hrvband {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

InputFormat parse_input_format(std::string_view name) {
    if (name == "peak-times") return InputFormat::PeakTimes;
    if (name == "intervals") return InputFormat::Intervals;
    if (name == "uniform") return InputFormat::Uniform;
    throw ConfigError("format: unknown input format '" + std::string(name) +
                      "' (expected peak-times, intervals or uniform)");
}

std::string to_string(InputFormat format) {
    switch (format) {
        case InputFormat::PeakTimes: return "peak-times";
        case InputFormat::Intervals: return "intervals";
        case InputFormat::Uniform: return "uniform";
    }
    return "peak-times";
}

void RunConfig::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(field) + ": must be a positive number");
    };
    positive(resample_step, "resample_step");
    positive(b_step, "b_step");
    positive(half_width, "half_width");
    if (k_max < 1) throw ConfigError("k_max: must be at least 1");
    if (min_segment_length < 1) throw ConfigError("min_segment_length: must be at least 1");
    if (!(stability_fraction >= 0.0) || !std::isfinite(stability_fraction))
        throw ConfigError("stability_fraction: must be a non-negative number");
    if (vanishing_moments < 2 || vanishing_moments > 10) throw ConfigError("vanishing_moments: must be in 2..10");
    if (threads < 0) throw ConfigError("threads: must be >= 0");
    if (bands.empty()) throw ConfigError("bands: at least one band is required");
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        const std::string field = "bands[" + std::to_string(i) + "]";
        if (b.name.empty() || b.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                                  std::string::npos)
            throw ConfigError(field + ".name: must be a non-empty [A-Za-z0-9_-] label");
        if (!(b.lo > 0.0) || !std::isfinite(b.lo)) throw ConfigError(field + ".lo: must be positive");
        if (!(b.hi > b.lo) || !std::isfinite(b.hi)) throw ConfigError(field + ".lo: must be below " + field + ".hi");
        for (std::size_t j = 0; j < i; ++j) {
            if (bands[j].name == b.name) throw ConfigError(field + ".name: duplicate band name '" + b.name + "'");
            if (b.lo < bands[j].hi && bands[j].lo < b.hi)
                throw ConfigError(field + ": overlaps bands[" + std::to_string(j) + "]");
        }
    }
    if (recording_start) {
        try {
            parse_clock(*recording_start);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("recording_start: ") + e.what());
        }
    }
}

std::string config_to_json(const RunConfig& c) {
    ordered_json j;
    j["input"] = c.input;
    j["format"] = to_string(c.format);
    j["bands"] = ordered_json::array();
    for (const auto& b : c.bands) j["bands"].push_back({{"name", b.name}, {"lo", b.lo}, {"hi", b.hi}});
    j["family"] = to_string(c.family);
    j["vanishing_moments"] = c.vanishing_moments;
    j["resample_step"] = c.resample_step;
    j["b_step"] = c.b_step;
    j["half_width"] = c.half_width;
    j["k_max"] = c.k_max;
    j["min_segment_length"] = c.min_segment_length;
    j["stability_fraction"] = c.stability_fraction;
    j["artifact_policy"] = to_string(c.artifact_policy);
    j["recording_start"] = c.recording_start ? ordered_json(*c.recording_start) : ordered_json(nullptr);
    j["squared_modulus"] = c.squared_modulus;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& json_text, RunConfig c) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const ordered_json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "input") c.input = value.get<std::string>();
            else if (key == "format") c.format = parse_input_format(value.get<std::string>());
            else if (key == "bands") {
                c.bands.clear();
                for (const auto& b : value)
                    c.bands.push_back({b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("name").get<std::string>()});
            } else if (key == "family") c.family = parse_wavelet_family(value.get<std::string>());
            else if (key == "vanishing_moments") c.vanishing_moments = value.get<int>();
            else if (key == "resample_step") c.resample_step = value.get<double>();
            else if (key == "b_step") c.b_step = value.get<double>();
            else if (key == "half_width") c.half_width = value.get<double>();
            else if (key == "k_max") c.k_max = value.get<std::size_t>();
            else if (key == "min_segment_length") c.min_segment_length = value.get<std::size_t>();
            else if (key == "stability_fraction") c.stability_fraction = value.get<double>();
            else if (key == "artifact_policy") c.artifact_policy = parse_artifact_policy(value.get<std::string>());
            else if (key == "recording_start") {
                if (value.is_null()) c.recording_start.reset();
                else c.recording_start = value.get<std::string>();
            } else if (key == "squared_modulus") c.squared_modulus = value.get<bool>();
            else if (key == "output_dir") c.output_dir = value.get<std::string>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "threads") c.threads = value.get<int>();
            else throw ConfigError("unknown key");
        } catch (const ordered_json::exception& e) {
            throw ConfigError(key + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(key + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), std::move(base));
}

UniformSeries load_signal(const RunConfig& config) {
    if (config.input.empty()) throw ConfigError("input: no input file given");
    if (config.format == InputFormat::Uniform) return load_uniform_csv(config.input);
    const RRFormat fmt = config.format == InputFormat::PeakTimes ? RRFormat::PeakTimes : RRFormat::Intervals;
    const RRSeries raw = load_rr(config.input, fmt);
    return resample(clean_artifacts(raw, config.artifact_policy), config.resample_step);
}

namespace {

BandResult analyze_band(const UniformSeries& signal, const BandSpec& band, const RunConfig& config) {
    FittedWavelet wavelet = fit_band(config.family, band, config.half_width, config.vanishing_moments);
    TransformOptions topt;
    topt.b_step = config.b_step;
    topt.threads = config.threads;
    CoefficientSeries coeffs = wavelet_coefficients(signal, wavelet, topt);
    std::vector<double> series = band_energy(coeffs, config.squared_modulus);

    SegmentationOptions sopt;
    sopt.min_segment_length = config.min_segment_length;
    sopt.threads = config.threads;
    // Short recordings cap K at what the minimum segment length allows.
    const std::size_t k_cap = std::max<std::size_t>(1, series.size() / config.min_segment_length);
    if (series.size() < config.min_segment_length)
        throw InputError("band " + band.name + ": only " + std::to_string(series.size()) +
                         " interior positions, fewer than min_segment_length");
    PenaltyPath path = penalty_path(series, std::min(config.k_max, k_cap), sopt);
    Segmentation selected = select_segmentation(path, config.stability_fraction);
    if (selected.n != series.size()) throw InvariantError("segmentation length does not match the series");
    return BandResult{std::move(wavelet), std::move(coeffs), std::move(series), std::move(path), std::move(selected)};
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string clock_at(const RunConfig& config, std::size_t index) {
    if (!config.recording_start) return "";
    return format_clock(index_to_clock(index, config.b_step, parse_clock(*config.recording_start)));
}

double mean_over(const UniformSeries& s, double t0, double t1) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double t = s.time_at(k);
        if (t >= t0 && t < t1) {
            sum += s.values[k];
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : std::nan("");
}

std::string render_report_csv(const BandResult& r, const RunConfig& config) {
    std::ostringstream out;
    out << "index,clock_time,band,segment_mean_before,segment_mean_after,segment_var_before,segment_var_after\n";
    const auto& segs = r.selected.segments;
    for (std::size_t i = 0; i < r.selected.change_points.size(); ++i) {
        const std::size_t index = r.coefficients.first_index + r.selected.change_points[i];
        out << index << ',' << clock_at(config, index) << ',' << r.coefficients.band.name << ','
            << fmt("%.8e", segs[i].mean) << ',' << fmt("%.8e", segs[i + 1].mean) << ','
            << fmt("%.8e", segs[i].variance) << ',' << fmt("%.8e", segs[i + 1].variance) << '\n';
    }
    return out.str();
}

std::string render_report_text(const BandResult& r, const RunConfig& config) {
    std::ostringstream out;
    const auto& band = r.coefficients.band;
    out << "band " << band.name << " (" << band.lo << " - " << band.hi << " Hz), " << to_string(config.family)
        << " wavelet\n";
    out << "segments: " << r.selected.segment_count() << " over " << r.selected.n << " positions (grid index "
        << r.coefficients.first_index << " to " << r.coefficients.first_index + r.selected.n - 1 << ")\n";
    if (r.selected.change_points.empty()) out << "no change point detected\n";
    for (std::size_t cp : r.selected.change_points) {
        const std::size_t index = r.coefficients.first_index + cp;
        out << "change point at index " << index;
        if (config.recording_start) out << " (" << clock_at(config, index) << ")";
        out << '\n';
    }
    return out.str();
}

std::string render_path_csv(const PenaltyPath& path) {
    std::ostringstream out;
    out << "K,contrast,hull_vertex,beta_lo,beta_hi\n";
    for (const auto& e : path.entries)
        out << e.segments() << ',' << fmt("%.12e", e.contrast()) << ',' << (e.hull_vertex ? 1 : 0) << ','
            << fmt("%.8e", e.beta_lo) << ',' << fmt("%.8e", e.beta_hi) << '\n';
    return out.str();
}

std::string render_summary(const AnalysisResult& result, const RunConfig& config) {
    std::ostringstream out;
    out << "band,segment,start_index,end_index,start_clock,end_clock,mean_modulus,var_modulus,mean_rr\n";
    for (const auto& r : result.bands) {
        const auto& c = r.coefficients;
        for (std::size_t s = 0; s < r.selected.segments.size(); ++s) {
            const auto& seg = r.selected.segments[s];
            const std::size_t i0 = c.first_index + seg.begin;
            const std::size_t i1 = c.first_index + seg.end;  // exclusive
            const double t0 = c.start_time + static_cast<double>(i0) * c.b_step;
            const double t1 = c.start_time + static_cast<double>(i1) * c.b_step;
            out << c.band.name << ',' << s << ',' << i0 << ',' << i1 << ',' << clock_at(config, i0) << ','
                << clock_at(config, i1) << ',' << fmt("%.8e", seg.mean) << ',' << fmt("%.8e", seg.variance) << ','
                << fmt("%.8e", mean_over(result.signal, t0, t1)) << '\n';
        }
    }
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing or unreadable file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

AnalysisResult analyze_signal(const UniformSeries& signal, const RunConfig& config) {
    config.validate();
    signal.validate();
    AnalysisResult result;
    result.signal = signal;
    std::vector<std::future<BandResult>> jobs;
    for (const auto& band : config.bands)
        jobs.push_back(std::async(std::launch::async, [&signal, band, &config] { return analyze_band(signal, band, config); }));
    // get() in band order: the first failing band's exception propagates.
    std::exception_ptr first_error;
    for (auto& job : jobs) {
        try {
            result.bands.push_back(job.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

AnalysisResult run_analyze(const RunConfig& config) {
    config.validate();
    const UniformSeries signal = load_signal(config);
    AnalysisResult result = analyze_signal(signal, config);

    std::map<std::string, std::string> files;
    files["effective_config.json"] = config_to_json(config);
    {
        std::ostringstream s;
        write_uniform_csv(s, result.signal);
        files["signal.csv"] = s.str();
    }
    for (const auto& r : result.bands) {
        const std::string& name = r.coefficients.band.name;
        std::ostringstream coeffs;
        write_coefficients_csv(coeffs, r.coefficients);
        files["coefficients_" + name + ".csv"] = coeffs.str();
        files["changepoints_" + name + ".csv"] = render_report_csv(r, config);
        files["changepoints_" + name + ".txt"] = render_report_text(r, config);
        files["penalty_path_" + name + ".csv"] = render_path_csv(r.path);
    }
    files["summary.csv"] = render_summary(result, config);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw InputError("cannot create output directory '" + config.output_dir + "': " + ec.message());
    for (const auto& [name, content] : files) write_file(fs::path(config.output_dir) / name, content);
    return result;
}

void run_synth(const RunConfig& config, const std::string& spec_path) {
    config.validate();
    const PiecewiseSpec spec = load_piecewise_spec(spec_path);
    const UniformSeries signal = generate(spec, config.seed);
    std::ostringstream csv;
    write_uniform_csv(csv, signal);
    std::ostringstream truth;
    truth << "# planted change points on the " << config.b_step << " s coefficient grid\n";
    for (std::size_t idx : planted_truth(spec, config.b_step)) truth << idx << '\n';

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) throw InputError("cannot create output directory '" + config.output_dir + "': " + ec.message());
    write_file(fs::path(config.output_dir) / "synth_signal.csv", csv.str());
    write_file(fs::path(config.output_dir) / "synth_truth.txt", truth.str());
}

void run_plotdata(const std::string& analysis_dir, const std::string& plot_dir) {
    const fs::path in(analysis_dir);
    RunConfig config;
    try {
        config = config_from_json(read_file(in / "effective_config.json"));
    } catch (const ConfigError& e) {
        throw InputError(std::string("effective_config.json: ") + e.what());
    }

    std::map<std::string, std::string> files;
    double signal_start = 0.0;
    {
        std::istringstream ss(read_file(in / "signal.csv"));
        const UniformSeries signal = read_uniform_csv(ss);
        signal_start = signal.start_time;
        std::ostringstream out;
        out << "# t rr\n";
        for (std::size_t k = 0; k < signal.size(); ++k)
            out << fmt("%.3f", signal.time_at(k)) << ' ' << fmt("%.6f", signal.values[k]) << '\n';
        files["rr.dat"] = out.str();
    }

    // Segment means per band from the summary.
    struct SummarySeg {
        std::size_t i0, i1;
        double mean;
    };
    std::map<std::string, std::vector<SummarySeg>> summary;
    {
        std::istringstream ss(read_file(in / "summary.csv"));
        std::string line;
        std::getline(ss, line);
        while (std::getline(ss, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cols.push_back(cell);
            if (line.back() == ',') cols.emplace_back();
            if (cols.size() != 9) throw InputError("summary.csv: malformed row '" + line + "'");
            summary[cols[0]].push_back({std::stoul(cols[2]), std::stoul(cols[3]), std::stod(cols[6])});
        }
    }

    for (const auto& band : config.bands) {
        std::istringstream cs(read_file(in / ("coefficients_" + band.name + ".csv")));
        const CoefficientRows rows = read_coefficients_csv(cs);
        std::ostringstream mod;
        mod << "# b modulus\n";
        for (std::size_t i = 0; i < rows.b.size(); ++i) mod << fmt("%.1f", rows.b[i]) << ' ' << fmt("%.8e", rows.modulus[i]) << '\n';
        files["modulus_" + band.name + ".dat"] = mod.str();

        std::istringstream rs(read_file(in / ("changepoints_" + band.name + ".csv")));
        std::string line;
        std::getline(rs, line);
        std::ostringstream markers;
        markers << "# b index\n";
        while (std::getline(rs, line)) {
            if (line.empty()) continue;
            const std::size_t index = std::stoul(line.substr(0, line.find(',')));
            const double b = signal_start + static_cast<double>(index) * config.b_step;
            markers << fmt("%.1f", b) << ' ' << index << '\n';
        }
        files["markers_" + band.name + ".dat"] = markers.str();

        std::ostringstream steps;
        steps << "# b segment_mean\n";
        const auto it = summary.find(band.name);
        if (it == summary.end()) throw InputError("summary.csv: no rows for band " + band.name);
        if (!rows.b.empty()) {
            // Grid index of the first coefficient row.
            const double b0 = rows.b.front();
            const std::size_t first = it->second.front().i0;
            for (std::size_t i = 0; i < rows.b.size(); ++i) {
                const std::size_t index = first + i;
                for (const auto& seg : it->second)
                    if (index >= seg.i0 && index < seg.i1) {
                        steps << fmt("%.1f", b0 + static_cast<double>(i) * config.b_step) << ' ' << fmt("%.8e", seg.mean) << '\n';
                        break;
                    }
            }
        }
        files["segment_means_" + band.name + ".dat"] = steps.str();
    }

    std::error_code ec;
    fs::create_directories(plot_dir, ec);
    if (ec) throw InputError("cannot create plot directory '" + plot_dir + "': " + ec.message());
    for (const auto& [name, content] : files) write_file(fs::path(plot_dir) / name, content);
}

std::vector<SelfTestLine> run_selftest() {
    std::vector<SelfTestLine> lines;
    auto record = [&](std::string name, bool ok, std::string detail) {
        lines.push_back({std::move(name), ok, std::move(detail)});
    };
    auto guarded = [&](const std::string& name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record(name, false, e.what());
        }
    };

    guarded("gabor pseudo support", [&] {
        const auto g = [](double t) { return cplx{std::exp(-0.25 * t * t), 0.0}; };
        const double r = pseudo_support_ratio(g, {-3.5, 3.5}, 1e-3, {-16.0, 16.0});
        record("gabor pseudo support", std::abs(r - std::erf(3.5 / std::numbers::sqrt2)) < 1e-6, fmt("rho=%.6f", r));
    });
    guarded("daubechies fit", [&] {
        const FittedWavelet w = fit_by_scaling_modulation(daubechies_mother(6), orthosympathetic_band());
        const double frac = sampled_band_energy_fraction(w, orthosympathetic_band(), 0.05);
        record("daubechies fit", std::abs(w.rate() - 0.0659) < 5e-4 && frac >= 0.999,
               fmt("rate=%.5f", w.rate()) + " " + fmt("in-band=%.6f", frac));
    });
    guarded("segmentation", [&] {
        std::vector<double> x(60);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i < 30 ? 0.0 : 5.0) + 0.1 * std::sin(1.7 * static_cast<double>(i));
        const Segmentation s = optimal_partition(x, 2, {5, 1});
        record("segmentation", s.change_points.size() == 1 && s.change_points[0] == 30,
               "tau=" + (s.change_points.empty() ? std::string("none") : std::to_string(s.change_points[0])));
    });
    guarded("clock", [&] {
        const auto c = format_clock(index_to_clock(28220, 1.0, parse_clock("05:50:30")));
        record("clock", c == "13:40:50", c);
    });
    return lines;
}

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const InputError*>(&error)) return 1;
    if (dynamic_cast<const ConfigError*>(&error)) return 2;
    return 3;
}

}  // namespace hrvband
