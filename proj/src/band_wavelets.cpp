#include "hrvband/band_wavelets.hpp"

#include "fft.hpp"
#include "hrvband/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

namespace hrvband {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal Daubechies lowpass filters, sum h = sqrt(2), from spectral
// factorization of the Daubechies polynomial at 50-digit precision.
const std::array<std::vector<double>, 9> kDaubechiesFilters = {{
    // 2 vanishing moments
    {0.4829629131445341434, 0.8365163037378079056, 0.224143868042013381,
     -0.1294095225512603812},
    // 3 vanishing moments
    {0.332670552950082616, 0.8068915093110925765, 0.4598775021184915701,
     -0.1350110200102545887, -0.08544127388202666169, 0.0352262918857095366},
    // 4 vanishing moments
    {0.2303778133088965009, 0.7148465705529156471, 0.6308807679298589079,
     -0.02798376941685985421, -0.1870348117190930841, 0.03084138183556076363,
     0.03288301166688519974, -0.0105974017850690321},
    // 5 vanishing moments
    {0.1601023979741929145, 0.6038292697971896705, 0.7243085284377729277,
     0.1384281459013207315, -0.2422948870663820319, -0.03224486958463837465,
     0.07757149384004571352, -0.006241490212798274274, -0.01258075199908199947,
     0.003335725285473771278},
    // 6 vanishing moments
    {0.1115407433501094636, 0.4946238903984530857, 0.7511339080210953507,
     0.3152503517091976291, -0.2262646939654398201, -0.1297668675672619356,
     0.0975016055873230491, 0.02752286553030572863, -0.03158203931748602957,
     0.0005538422011614961393, 0.00477725751094551064, -0.001077301085308479565},
    // 7 vanishing moments
    {0.07785205408500917902, 0.3965393194819173065, 0.7291320908462351199,
     0.4697822874051931225, -0.1439060039285649754, -0.2240361849938749826,
     0.07130921926683026475, 0.08061260915108307191, -0.03802993693501441358,
     -0.01657454163066688065, 0.01255099855609984061, 0.0004295779729213665211,
     -0.001801640704047490915, 0.0003537137999745202484},
    // 8 vanishing moments
    {0.05441584224310400996, 0.3128715909142999707, 0.6756307362972898068,
     0.5853546836542067128, -0.01582910525634930567, -0.2840155429615469265,
     0.0004724845739132827704, 0.1287474266204784589, -0.01736930100180754617,
     -0.04408825393079475151, 0.01398102791739828165, 0.008746094047405776716,
     -0.00487035299345157431, -0.0003917403733769470463, 0.0006754494064505693664,
     -0.0001174767841247695337},
    // 9 vanishing moments
    {0.03807794736387834659, 0.2438346746125903537, 0.6048231236901111119,
     0.6572880780513005381, 0.1331973858250075762, -0.2932737832791749088,
     -0.09684078322297646051, 0.1485407493381063801, 0.03072568147933337921,
     -0.06763282906132997368, 0.0002509471148314519576, 0.02236166212367909721,
     -0.004723204757751397278, -0.004281503682463429834, 0.001847646883056226477,
     0.0002303857635231959672, -0.000251963188942710137, 0.00003934732031627159948},
    // 10 vanishing moments
    {0.02667005790055555359, 0.188176800077691489, 0.5272011889317255865,
     0.6884590394536035657, 0.2811723436605774607, -0.2498464243273153794,
     -0.1959462743773770435, 0.1273693403357932601, 0.09305736460357235116,
     -0.07139414716639708715, -0.02945753682187581286, 0.03321267405934100174,
     0.003606553566956169655, -0.01073317548333057504, 0.001395351747052901166,
     0.001992405295185056117, -0.0006858566949597116266, -0.000116466855129285451,
     0.00009358867032006959133, -0.00001326420289452124481},
}};

}  // namespace

void BandSpec::validate() const {
    const std::string label = name.empty() ? "band" : "band '" + name + "'";
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0))
        throw ConfigError(label + ": lo must be positive");
    if (!(hi > lo)) throw ConfigError(label + ": lo must be below hi");
}

BandSpec orthosympathetic_band() { return {0.04, 0.15, "orthosympathetic"}; }
BandSpec parasympathetic_band() { return {0.15, 0.5, "parasympathetic"}; }

WaveletFamily parse_wavelet_family(std::string_view name) {
    if (name == "gabor") return WaveletFamily::Gabor;
    if (name == "daubechies") return WaveletFamily::Daubechies;
    throw ConfigError("unknown wavelet family '" + std::string(name) + "' (expected gabor or daubechies)");
}

std::string to_string(WaveletFamily family) {
    return family == WaveletFamily::Gabor ? "gabor" : "daubechies";
}

namespace detail {

class MotherImpl {
public:
    virtual ~MotherImpl() = default;
    virtual WaveletFamily family() const = 0;
    virtual cplx evaluate(double t) const = 0;
    virtual cplx spectrum(double f) const = 0;
    virtual Interval time_support() const = 0;
    virtual Interval window() const = 0;
    virtual Interval freq_support() const = 0;
    virtual double rho() const = 0;
    virtual int vanishing_moments() const = 0;
};

namespace {

class GaborMother final : public MotherImpl {
public:
    explicit GaborMother(double half_width) : half_width_(half_width) {}

    WaveletFamily family() const override { return WaveletFamily::Gabor; }
    cplx evaluate(double t) const override { return {std::pow(kPi, -0.25) * std::exp(-0.5 * t * t), 0.0}; }
    cplx spectrum(double f) const override {
        const double xi = 2.0 * kPi * f;
        return {std::pow(4.0 * kPi, 0.25) * std::exp(-0.5 * xi * xi), 0.0};
    }
    Interval time_support() const override { return {-half_width_, half_width_}; }
    Interval window() const override { return {-4.0, 4.0}; }
    Interval freq_support() const override {
        const double w = half_width_ / (2.0 * kPi);
        return {-w, w};
    }
    // |g_hat|^2 is proportional to exp(-xi^2), so [-L, L] in xi holds erf(L).
    double rho() const override { return std::erf(half_width_); }
    int vanishing_moments() const override { return 0; }

private:
    double half_width_;
};

class DaubechiesMother final : public MotherImpl {
    static constexpr double kTailEnergy = 1e-14;

public:
    DaubechiesMother(int p, const DaubechiesOptions& opt) : p_(p), opt_(opt) {
        const DaubechiesTable table = cascade_daubechies(p, opt.level);
        const double c = opt.time_scale;
        spacing_ = table.spacing / c;
        support_ = static_cast<double>(2 * p - 1) / c;

        // Analytic signal by FFT over a zero-padded period of 8x the support.
        const std::size_t m = table.psi.size();
        const std::size_t n = detail::next_pow2(8 * m);
        const std::size_t pad = (n - m) / 2;
        std::vector<cplx> buf(n, cplx{});
        const double amp = std::sqrt(c);
        for (std::size_t i = 0; i < m; ++i) buf[pad + i] = amp * table.psi[i];
        fft_inplace(buf, FftDirection::Forward);

        // rho from the discrete spectrum of the table (positive frequencies only).
        const double df = 1.0 / (static_cast<double>(n) * spacing_);
        double total = 0.0, inside = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k) {
            const double e = std::norm(buf[k]);
            const double f = static_cast<double>(k) * df;
            total += e;
            if (f >= opt.freq_support.lo && f <= opt.freq_support.hi) inside += e;
        }
        rho_ = inside / total;

        for (std::size_t k = 1; k < n / 2; ++k) buf[k] *= 2.0;
        for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = 0.0;
        fft_inplace(buf, FftDirection::Backward);
        for (auto& z : buf) z /= static_cast<double>(n);

        // Truncate where the energy outside the kept window is below kTailEnergy of the total.
        std::vector<double> cum(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + std::norm(buf[i]);
        const double energy = cum[n];
        std::size_t ext = 0;
        const std::size_t step = std::max<std::size_t>(1, m / 64);
        while (ext < pad) {
            const double outside = cum[pad - ext] + (energy - cum[pad + m + ext]);
            if (outside <= kTailEnergy * energy) break;
            ext = std::min(pad, ext + step);
        }
        const std::size_t first = pad - ext;
        const std::size_t last = pad + m + ext;  // exclusive
        table_.assign(buf.begin() + static_cast<std::ptrdiff_t>(first), buf.begin() + static_cast<std::ptrdiff_t>(last));
        // Exact energy of the piecewise-linear interpolant that evaluate() returns.
        double lin = 0.0;
        for (std::size_t i = 0; i + 1 < table_.size(); ++i)
            lin += std::norm(table_[i]) + std::real(table_[i] * std::conj(table_[i + 1])) + std::norm(table_[i + 1]);
        const double norm = std::sqrt(lin * spacing_ / 3.0);
        for (auto& z : table_) z /= norm;
        t0_ = -static_cast<double>(ext) * spacing_;
        filter_ = daubechies_filter(p);
    }

    WaveletFamily family() const override { return WaveletFamily::Daubechies; }

    cplx evaluate(double t) const override {
        const double x = (t - t0_) / spacing_;
        if (!(x >= 0.0)) return {};
        const auto i = static_cast<std::size_t>(x);
        if (i + 1 >= table_.size()) return i + 1 == table_.size() ? table_[i] : cplx{};
        const double w = x - static_cast<double>(i);
        return (1.0 - w) * table_[i] + w * table_[i + 1];
    }

    cplx spectrum(double f) const override {
        if (f <= 0.0) return {};
        const double c = opt_.time_scale;
        return std::sqrt(2.0 / c) * daubechies_product_spectrum(filter_, 2.0 * kPi * f / c);
    }

    Interval time_support() const override { return {0.0, support_}; }
    Interval window() const override {
        return {t0_, t0_ + static_cast<double>(table_.size() - 1) * spacing_};
    }
    Interval freq_support() const override { return opt_.freq_support; }
    double rho() const override { return rho_; }
    int vanishing_moments() const override { return p_; }

private:
    int p_;
    DaubechiesOptions opt_;
    double spacing_ = 0.0;
    double support_ = 0.0;
    double t0_ = 0.0;
    double rho_ = 0.0;
    std::vector<cplx> table_;
    std::span<const double> filter_;
};

}  // namespace
}  // namespace detail

MotherWavelet::MotherWavelet(std::shared_ptr<const detail::MotherImpl> impl) : impl_(std::move(impl)) {
    if (!impl_) throw InvariantError("null mother wavelet");
}

WaveletFamily MotherWavelet::family() const { return impl_->family(); }
cplx MotherWavelet::evaluate(double t) const { return impl_->evaluate(t); }
cplx MotherWavelet::spectrum(double f) const { return impl_->spectrum(f); }
Interval MotherWavelet::time_support() const { return impl_->time_support(); }
Interval MotherWavelet::window() const { return impl_->window(); }
Interval MotherWavelet::freq_support() const { return impl_->freq_support(); }
double MotherWavelet::rho() const { return impl_->rho(); }
int MotherWavelet::vanishing_moments() const { return impl_->vanishing_moments(); }

MotherWavelet gabor_mother(double half_width) {
    if (!(half_width > 0.0)) throw ConfigError("Gabor pseudo-support half-width must be positive");
    return MotherWavelet(std::make_shared<detail::GaborMother>(half_width));
}

std::span<const double> daubechies_filter(int vanishing_moments) {
    if (vanishing_moments < 2 || vanishing_moments > 10)
        throw ConfigError("Daubechies vanishing moments must be in 2..10, got " + std::to_string(vanishing_moments));
    return kDaubechiesFilters[static_cast<std::size_t>(vanishing_moments - 2)];
}

DaubechiesTable cascade_daubechies(int vanishing_moments, int level) {
    const auto h = daubechies_filter(vanishing_moments);
    if (level < 1 || level > 20) throw ConfigError("cascade level must be in 1..20");
    const int taps = static_cast<int>(h.size());
    const int last = taps - 1;
    const double r2 = std::numbers::sqrt2;

    // phi at the integers: eigenvector of the two-scale matrix for eigenvalue 1, sum = 1.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(taps, taps);
    for (int k = 0; k < taps; ++k)
        for (int m = 0; m < taps; ++m) {
            const int n = 2 * k - m;
            if (n >= 0 && n < taps) a(k, m) = r2 * h[static_cast<std::size_t>(n)];
        }
    Eigen::MatrixXd sys = a - Eigen::MatrixXd::Identity(taps, taps);
    sys.row(taps - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(taps);
    rhs(taps - 1) = 1.0;
    const Eigen::VectorXd ints = sys.fullPivLu().solve(rhs);

    std::vector<double> phi(ints.data(), ints.data() + taps);
    // After refining to level j, phi[i] = phi(i / 2^j) for i in [0, last * 2^j].
    auto refine = [&](const std::vector<double>& coarse, int j) {
        const std::size_t half = std::size_t{1} << (j - 1);
        std::vector<double> fine(static_cast<std::size_t>(last) * 2 * half + 1, 0.0);
        for (std::size_t i = 0; i < fine.size(); ++i) {
            if (i % 2 == 0) {
                fine[i] = coarse[i / 2];
                continue;
            }
            double s = 0.0;
            for (int n = 0; n < taps; ++n) {
                const auto off = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n) * static_cast<std::ptrdiff_t>(half);
                if (off >= 0 && static_cast<std::size_t>(off) < coarse.size())
                    s += h[static_cast<std::size_t>(n)] * coarse[static_cast<std::size_t>(off)];
            }
            fine[i] = r2 * s;
        }
        return fine;
    };
    std::vector<double> phi_coarse = phi;  // level - 1
    for (int j = 1; j < level; ++j) phi_coarse = refine(phi_coarse, j);
    const std::vector<double> phi_fine = refine(phi_coarse, level);

    // psi(x) = sqrt(2) sum g_n phi(2x - n), g_n = (-1)^n h_{last - n}; 2x - n lands on the level-1 grid.
    const std::size_t half = std::size_t{1} << (level - 1);
    std::vector<double> psi(phi_fine.size(), 0.0);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        double s = 0.0;
        for (int n = 0; n < taps; ++n) {
            const auto off = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n) * static_cast<std::ptrdiff_t>(half);
            if (off < 0 || static_cast<std::size_t>(off) >= phi_coarse.size()) continue;
            const double g = (n % 2 == 0 ? 1.0 : -1.0) * h[static_cast<std::size_t>(last - n)];
            s += g * phi_coarse[static_cast<std::size_t>(off)];
        }
        psi[i] = r2 * s;
    }

    DaubechiesTable out;
    out.vanishing_moments = vanishing_moments;
    out.level = level;
    out.spacing = std::ldexp(1.0, -level);
    out.phi = phi_fine;
    out.psi = std::move(psi);
    return out;
}

cplx daubechies_product_spectrum(std::span<const double> filter, double xi, int factors) {
    const std::size_t taps = filter.size();
    auto poly = [&](double w, bool highpass) {
        // (1/sqrt 2) sum c_n e^{-i w n}
        cplx acc{};
        const cplx rot = std::polar(1.0, -w);
        cplx z{1.0, 0.0};
        for (std::size_t n = 0; n < taps; ++n) {
            const double c = highpass ? ((n % 2 == 0 ? 1.0 : -1.0) * filter[taps - 1 - n]) : filter[n];
            acc += c * z;
            z *= rot;
        }
        return acc / std::numbers::sqrt2;
    };
    cplx result = poly(0.5 * xi, true);
    double w = 0.25 * xi;
    for (int j = 0; j < factors && std::abs(w) > 1e-12; ++j, w *= 0.5) result *= poly(w, false);
    return result;
}

MotherWavelet daubechies_mother(int vanishing_moments, const DaubechiesOptions& options) {
    daubechies_filter(vanishing_moments);
    if (options.level < 6 || options.level > 16) throw ConfigError("Daubechies refinement level must be in 6..16");
    if (!(options.time_scale > 0.0)) throw ConfigError("Daubechies time scale must be positive");
    if (!(options.freq_support.hi > options.freq_support.lo))
        throw ConfigError("Daubechies frequency pseudo support must have positive width");
    return MotherWavelet(std::make_shared<detail::DaubechiesMother>(vanishing_moments, options));
}

FittedWavelet::FittedWavelet(MotherWavelet mother, BandSpec band, double amplitude, double rate,
                             double modulation_hz, double half_width)
    : mother_(std::move(mother)),
      band_(std::move(band)),
      amplitude_(amplitude),
      rate_(rate),
      modulation_hz_(modulation_hz),
      half_width_(half_width) {
    if (!(amplitude_ > 0.0) || !(rate_ > 0.0)) throw InvariantError("fitted wavelet needs positive amplitude and rate");
}

double FittedWavelet::modulation_rad() const { return 2.0 * kPi * modulation_hz_; }

Interval FittedWavelet::time_support() const {
    const Interval s = mother_.time_support();
    return {s.lo / rate_, s.hi / rate_};
}

Interval FittedWavelet::window() const {
    const Interval w = mother_.window();
    return {w.lo / rate_, w.hi / rate_};
}

Interval FittedWavelet::freq_support_hz() const {
    const Interval f = mother_.freq_support();
    return {modulation_hz_ + rate_ * f.lo, modulation_hz_ + rate_ * f.hi};
}

cplx FittedWavelet::evaluate(double t) const {
    return amplitude_ * std::polar(1.0, 2.0 * kPi * modulation_hz_ * t) * mother_.evaluate(rate_ * t);
}

cplx FittedWavelet::spectrum(double f_hz) const {
    return amplitude_ / rate_ * mother_.spectrum((f_hz - modulation_hz_) / rate_);
}

double pseudo_support_ratio(const std::function<cplx(double)>& g, Interval interval, double step, Interval window) {
    if (!(step > 0.0)) throw ConfigError("quadrature step must be positive");
    if (interval.hi < interval.lo) throw ConfigError("pseudo-support interval must satisfy lo <= hi");
    if (!(window.hi > window.lo)) throw ConfigError("quadrature window must have positive width");
    auto simpson = [&](double a, double b) {
        if (!(b > a)) return 0.0;
        auto n = static_cast<std::size_t>(std::ceil((b - a) / step));
        n = std::max<std::size_t>(2, n + (n % 2));
        const double h = (b - a) / static_cast<double>(n);
        double s = std::norm(g(a)) + std::norm(g(b));
        for (std::size_t i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * std::norm(g(a + h * static_cast<double>(i)));
        return s * h / 3.0;
    };
    const double total = simpson(window.lo, window.hi);
    if (!(total > 0.0)) throw InputError("function has zero energy on the quadrature window");
    const double inside = simpson(std::max(interval.lo, window.lo), std::min(interval.hi, window.hi));
    return std::clamp(inside / total, 0.0, 1.0);
}

FittedWavelet fit_by_scaling_modulation(const MotherWavelet& mother, const BandSpec& band) {
    band.validate();
    const Interval lam = mother.freq_support();
    if (!(lam.length() > 0.0)) throw ConfigError("mother wavelet has a zero-width frequency pseudo support");
    const double rate = band.width() / lam.length();
    const double eta = band.lo - rate * lam.lo;
    return FittedWavelet(mother, band, std::sqrt(rate), rate, eta);
}

FittedWavelet fit_gabor(const BandSpec& band, double half_width) {
    band.validate();
    if (!(half_width > 0.0)) throw ConfigError("Gabor pseudo-support half-width must be positive");
    const double sigma = 2.0 * half_width / (2.0 * kPi * band.width());
    const double rate = 1.0 / sigma;
    return FittedWavelet(gabor_mother(half_width), band, std::sqrt(rate), rate, band.center(), half_width);
}

FittedWavelet fit_band(WaveletFamily family, const BandSpec& band, double half_width, int vanishing_moments) {
    if (family == WaveletFamily::Gabor) return fit_gabor(band, half_width);
    return fit_by_scaling_modulation(daubechies_mother(vanishing_moments), band);
}

double sampled_band_energy_fraction(const FittedWavelet& wavelet, const BandSpec& band, double dt) {
    if (!(dt > 0.0)) throw ConfigError("sampling step must be positive");
    const Interval w = wavelet.window();
    const auto m = static_cast<std::size_t>(std::floor(w.length() / dt)) + 1;
    const std::size_t n = detail::next_pow2(16 * m);
    std::vector<cplx> buf(n, cplx{});
    for (std::size_t j = 0; j < m; ++j) buf[j] = wavelet.evaluate(w.lo + static_cast<double>(j) * dt);
    detail::fft_inplace(buf, detail::FftDirection::Forward);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    double total = 0.0, inside = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) * df;
        const double e = std::norm(buf[k]);
        total += e;
        if (f >= band.lo && f <= band.hi) inside += e;
    }
    if (!(total > 0.0)) throw InvariantError("sampled wavelet has zero energy");
    return inside / total;
}

double l2_norm(const FittedWavelet& wavelet, double dt) {
    if (!(dt > 0.0)) throw ConfigError("sampling step must be positive");
    const Interval w = wavelet.window();
    const auto n = static_cast<std::size_t>(std::ceil(w.length() / dt));
    const double h = w.length() / static_cast<double>(n);
    double s = 0.5 * (std::norm(wavelet.evaluate(w.lo)) + std::norm(wavelet.evaluate(w.hi)));
    for (std::size_t i = 1; i < n; ++i) s += std::norm(wavelet.evaluate(w.lo + h * static_cast<double>(i)));
    return std::sqrt(s * h);
}

void write_wavelet_csv(std::ostream& out, const FittedWavelet& wavelet, double dt) {
    if (!(dt > 0.0)) throw ConfigError("sampling step must be positive");
    const Interval w = wavelet.window();
    out << "t,re,im\n";
    char buf[128];
    const auto n = static_cast<std::size_t>(std::floor(w.length() / dt)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = w.lo + static_cast<double>(i) * dt;
        const cplx z = wavelet.evaluate(t);
        std::snprintf(buf, sizeof buf, "%.6f,%.8e,%.8e\n", t, z.real(), z.imag());
        out << buf;
    }
}

void write_spectrum_csv(std::ostream& out, const FittedWavelet& wavelet, double f_lo, double f_hi, double df) {
    if (!(df > 0.0) || !(f_hi > f_lo)) throw ConfigError("spectrum dump needs f_lo < f_hi and df > 0");
    out << "xi_hz,power\n";
    char buf[96];
    const auto n = static_cast<std::size_t>(std::floor((f_hi - f_lo) / df)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = f_lo + static_cast<double>(i) * df;
        std::snprintf(buf, sizeof buf, "%.6f,%.8e\n", f, std::norm(wavelet.spectrum(f)));
        out << buf;
    }
}

}  // namespace hrvband
