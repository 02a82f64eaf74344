#include "pmiris/encoding.hpp"

#include "pmiris/error.hpp"
#include "pmiris/hash.hpp"
#include "pmiris/metadata.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace pmiris {

namespace {

using Complex = std::complex<double>;

// Texture as doubles with its global mean removed; the filters are zero-mean so
// this only reduces rounding, and it makes 255-I an exact negation.
std::vector<double> centered_texture(const PolarIris& p) {
    std::vector<double> t(p.texture.begin(), p.texture.end());
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    for (auto& v : t) v -= mean;
    return t;
}

// Subtracts each radial row's mean over usable cells.
std::vector<double> row_centered_texture(const PolarIris& p) {
    std::vector<double> t(p.texture.begin(), p.texture.end());
    for (int r = 0; r < p.rows; ++r) {
        auto* row = &t[static_cast<std::size_t>(r) * p.cols];
        double sum = 0;
        int n = 0;
        for (int c = 0; c < p.cols; ++c) {
            if (p.mask.at(r, c)) {
                sum += row[c];
                ++n;
            }
        }
        const double mean = n > 0 ? sum / n : std::accumulate(row, row + p.cols, 0.0) / p.cols;
        for (int c = 0; c < p.cols; ++c) row[c] -= mean;
    }
    return t;
}

int wrap(int c, int n) {
    const int m = c % n;
    return m < 0 ? m + n : m;
}

/// O(1) "is every cell in this window usable" over a polar mask with clamped
/// rows and wrapped columns.
class SupportChecker {
public:
    SupportChecker(const Bitmap& mask, int pad_r, int pad_a)
        : rows_(mask.rows()), cols_(mask.cols()), pad_r_(pad_r), pad_a_(pad_a),
          ext_cols_(cols_ + 2 * pad_a + 1),
          prefix_(static_cast<std::size_t>(rows_ + 2 * pad_r + 1) * ext_cols_, 0) {
        const int er = rows_ + 2 * pad_r;
        for (int i = 0; i < er; ++i) {
            const int r = std::clamp(i - pad_r, 0, rows_ - 1);
            for (int j = 0; j < cols_ + 2 * pad_a; ++j) {
                const int bad = mask.at(r, wrap(j - pad_a, cols_)) ? 0 : 1;
                at(i + 1, j + 1) = bad + at(i, j + 1) + at(i + 1, j) - at(i, j);
            }
        }
    }

    bool all_usable(int r, int c, int half_r, int half_a) const {
        const int r0 = r - half_r + pad_r_, r1 = r + half_r + pad_r_ + 1;
        const int c0 = c - half_a + pad_a_, c1 = c + half_a + pad_a_ + 1;
        return at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0) == 0;
    }

private:
    std::int64_t& at(int i, int j) { return prefix_[static_cast<std::size_t>(i) * ext_cols_ + j]; }
    std::int64_t at(int i, int j) const { return prefix_[static_cast<std::size_t>(i) * ext_cols_ + j]; }

    int rows_, cols_, pad_r_, pad_a_, ext_cols_;
    std::vector<std::int64_t> prefix_;
};

struct GaborKernel {
    int half_r = 0;
    int half_a = 0;
    std::vector<Complex> taps;  // (2*half_r+1) x (2*half_a+1)
};

GaborKernel make_gabor(double wavelength, double sigma_ratio, double orientation) {
    const double sa = sigma_ratio * wavelength;
    const double sr = sa / 3.0;
    GaborKernel k;
    k.half_a = static_cast<int>(std::ceil(2.0 * sa));
    k.half_r = static_cast<int>(std::ceil(2.0 * sr));
    const int h = 2 * k.half_r + 1, w = 2 * k.half_a + 1;
    k.taps.resize(static_cast<std::size_t>(h) * w);
    std::vector<double> env(k.taps.size());
    const double omega = 2.0 * std::numbers::pi / wavelength;
    const double ca = std::cos(orientation), cr = std::sin(orientation);
    Complex sum = 0;
    double env_sum = 0;
    for (int y = -k.half_r; y <= k.half_r; ++y) {
        for (int x = -k.half_a; x <= k.half_a; ++x) {
            const auto i = static_cast<std::size_t>(y + k.half_r) * w + (x + k.half_a);
            env[i] = std::exp(-0.5 * (x * x / (sa * sa) + y * y / (sr * sr)));
            k.taps[i] = env[i] * std::polar(1.0, omega * (x * ca + y * cr));
            sum += k.taps[i];
            env_sum += env[i];
        }
    }
    // DC compensation keeps the filter localized and exactly zero-mean.
    const Complex comp = sum / env_sum;
    for (std::size_t i = 0; i < env.size(); ++i) k.taps[i] -= comp * env[i];
    return k;
}

IrisTemplate make_template(EncoderId id, int rows, int cols, int planes, std::uint64_t digest) {
    IrisTemplate t;
    t.encoder_id = id;
    t.rows = rows;
    t.cols = cols;
    t.bitplanes.assign(static_cast<std::size_t>(planes), Bitmap(rows, cols));
    t.mask = Bitmap(rows, cols);
    t.params_digest = digest;
    return t;
}

void digest_doubles(Fnv1a64& h, const std::vector<double>& v) {
    for (double d : v) h.update(format_real(d) + ",");
    h.update(";");
}

double box_muller(std::mt19937_64& rng) {
    auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    const double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

void GaborBankConfig::validate() const {
    if (wavelengths.empty() || orientations.empty()) throw Error(ErrorCode::InvalidArgument, "empty Gabor bank");
    for (double w : wavelengths) {
        if (!(w > 0)) throw Error(ErrorCode::InvalidArgument, "Gabor wavelengths must be positive");
    }
    if (!(sigma_ratio > 0)) throw Error(ErrorCode::InvalidArgument, "sigma_ratio must be positive");
    if (grid_stride.radial < 1 || grid_stride.angular < 1) {
        throw Error(ErrorCode::InvalidArgument, "grid stride must be >= 1");
    }
}

void LogGaborConfig::validate() const {
    if (center_wavelength != 0.0 && center_wavelength < 4.0) {
        throw Error(ErrorCode::InvalidArgument, "center_wavelength must be >= 4");
    }
    if (!(sigma_on_f > 0 && sigma_on_f < 1)) throw Error(ErrorCode::InvalidArgument, "sigma_on_f must be in (0,1)");
}

void KernelBank::validate() const {
    if (size < 1 || size % 2 == 0) throw Error(ErrorCode::BadKernelFile, "kernel size must be odd");
    if (kernels.empty() || kernels.size() > 32) throw Error(ErrorCode::BadKernelFile, "kernel count must be 1..32");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const auto& k = kernels[i];
        if (k.size() != static_cast<std::size_t>(size) * size) {
            throw Error(ErrorCode::BadKernelFile, "kernel " + std::to_string(i) + " has wrong size");
        }
        const double mean = std::accumulate(k.begin(), k.end(), 0.0) / static_cast<double>(k.size());
        if (std::abs(mean) > 1e-6) {
            throw Error(ErrorCode::NonZeroMeanKernel, "kernel " + std::to_string(i) + " mean " + format_real(mean));
        }
    }
}

KernelBank parse_kernel_bank(const std::string& text) {
    std::istringstream in(text);
    KernelBank bank;
    long k = 0, n = 0;
    if (!(in >> k >> n) || k < 1 || n < 1 || k > 255 || n > 32) {
        throw Error(ErrorCode::BadKernelFile, "first line must be 'k n' with k in 1..255 and n in 1..32");
    }
    bank.size = static_cast<int>(k);
    bank.source = KernelSource::file;
    for (long i = 0; i < n; ++i) {
        std::vector<double> kernel(static_cast<std::size_t>(k * k));
        for (auto& v : kernel) {
            if (!(in >> v) || !std::isfinite(v)) {
                throw Error(ErrorCode::BadKernelFile, "kernel " + std::to_string(i) + " is truncated or malformed");
            }
        }
        bank.kernels.push_back(std::move(kernel));
    }
    std::string extra;
    if (in >> extra) throw Error(ErrorCode::BadKernelFile, "trailing data after the last kernel");
    bank.validate();
    return bank;
}

KernelBank fallback_kernel_bank() {
    constexpr int k = 17, n = 8;
    constexpr double smooth_sigma = 2.0;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    KernelBank bank;
    bank.size = k;
    bank.source = KernelSource::fallback;

    std::vector<double> g(7);
    for (int i = -3; i <= 3; ++i) g[static_cast<std::size_t>(i + 3)] = std::exp(-0.5 * i * i / (smooth_sigma * smooth_sigma));

    std::vector<std::vector<double>> basis;
    basis.emplace_back(static_cast<std::size_t>(k * k), 1.0 / k);  // unit-norm constant vector
    for (int idx = 0; idx < n; ++idx) {
        std::vector<double> noise(static_cast<std::size_t>(k * k));
        for (auto& v : noise) v = box_muller(rng);
        std::vector<double> sm(noise.size(), 0.0);
        for (int y = 0; y < k; ++y) {
            for (int x = 0; x < k; ++x) {
                double s = 0;
                for (int dy = -3; dy <= 3; ++dy) {
                    for (int dx = -3; dx <= 3; ++dx) {
                        const int yy = std::clamp(y + dy, 0, k - 1), xx = std::clamp(x + dx, 0, k - 1);
                        s += g[static_cast<std::size_t>(dy + 3)] * g[static_cast<std::size_t>(dx + 3)] *
                             noise[static_cast<std::size_t>(yy * k + xx)];
                    }
                }
                sm[static_cast<std::size_t>(y * k + x)] = s;
            }
        }
        // modified Gram-Schmidt, applied twice for orthogonality at machine precision
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                const double dot = std::inner_product(sm.begin(), sm.end(), b.begin(), 0.0);
                for (std::size_t i = 0; i < sm.size(); ++i) sm[i] -= dot * b[i];
            }
        }
        const double norm = std::sqrt(std::inner_product(sm.begin(), sm.end(), sm.begin(), 0.0));
        for (auto& v : sm) v /= norm;
        basis.push_back(sm);
        bank.kernels.push_back(std::move(sm));
    }
    bank.validate();
    return bank;
}

KernelBank load_kernel_bank(const std::optional<std::filesystem::path>& path) {
    if (!path) return fallback_kernel_bank();
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::Io, "cannot open kernel bank " + path->string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_kernel_bank(ss.str());
}

std::string format_kernel_bank(const KernelBank& bank) {
    std::ostringstream out;
    out << bank.size << ' ' << bank.kernels.size() << '\n';
    for (const auto& k : bank.kernels) {
        for (int y = 0; y < bank.size; ++y) {
            for (int x = 0; x < bank.size; ++x) {
                out << (x ? " " : "") << format_real(k[static_cast<std::size_t>(y * bank.size + x)]);
            }
            out << '\n';
        }
    }
    return out.str();
}

std::uint64_t params_digest(const GaborBankConfig& cfg, int polar_rows, int polar_cols) {
    Fnv1a64 h;
    h.update("gabor2d;" + std::to_string(polar_rows) + "x" + std::to_string(polar_cols) + ";");
    digest_doubles(h, cfg.wavelengths);
    digest_doubles(h, {cfg.sigma_ratio});
    digest_doubles(h, cfg.orientations);
    h.update(std::to_string(cfg.grid_stride.radial) + "," + std::to_string(cfg.grid_stride.angular));
    return h.digest();
}

std::uint64_t params_digest(const LogGaborConfig& cfg, int polar_rows, int polar_cols) {
    Fnv1a64 h;
    h.update("loggabor1d;" + std::to_string(polar_rows) + "x" + std::to_string(polar_cols) + ";");
    const double wl = cfg.center_wavelength > 0 ? cfg.center_wavelength : polar_cols / 24.0;
    digest_doubles(h, {wl, cfg.sigma_on_f});
    return h.digest();
}

std::uint64_t params_digest(const KernelBank& bank, int polar_rows, int polar_cols) {
    Fnv1a64 h;
    h.update("bif;" + std::to_string(polar_rows) + "x" + std::to_string(polar_cols) + ";" +
             std::to_string(bank.size) + ";");
    for (const auto& k : bank.kernels) digest_doubles(h, k);
    return h.digest();
}

int angular_stride(EncoderId id, const GaborBankConfig& gabor) {
    return id == EncoderId::gabor2d ? gabor.grid_stride.angular : 1;
}

IrisTemplate encode_gabor2d(const PolarIris& p, const GaborBankConfig& cfg) {
    cfg.validate();
    if (p.cols % cfg.grid_stride.angular != 0) {
        throw Error(ErrorCode::InvalidArgument, "angular grid stride must divide the polar width");
    }
    std::vector<GaborKernel> bank;
    for (double wl : cfg.wavelengths) {
        for (double th : cfg.orientations) bank.push_back(make_gabor(wl, cfg.sigma_ratio, th));
    }
    int max_hr = 0, max_ha = 0;
    for (const auto& k : bank) {
        if (2 * k.half_r + 1 > p.rows || 2 * k.half_a + 1 > p.cols) {
            throw Error(ErrorCode::FilterLargerThanGrid, "Gabor support " + std::to_string(2 * k.half_r + 1) + "x" +
                                                             std::to_string(2 * k.half_a + 1) + " exceeds polar grid");
        }
        max_hr = std::max(max_hr, k.half_r);
        max_ha = std::max(max_ha, k.half_a);
    }
    const int sr = cfg.grid_stride.radial, sa = cfg.grid_stride.angular;
    const int grid_rows = p.rows / sr, grid_cols = p.cols / sa;
    if (grid_rows < 1) throw Error(ErrorCode::FilterLargerThanGrid, "radial stride exceeds polar rows");

    const auto tex = centered_texture(p);
    const SupportChecker support(p.mask, max_hr, max_ha);
    auto t = make_template(EncoderId::gabor2d, grid_rows, grid_cols, static_cast<int>(2 * bank.size()),
                           params_digest(cfg, p.rows, p.cols));

    std::vector<int> col_index;
    for (int gi = 0; gi < grid_rows; ++gi) {
        const int r = gi * sr + sr / 2;
        for (int gj = 0; gj < grid_cols; ++gj) {
            const int c = gj * sa;
            bool usable = true;
            for (std::size_t f = 0; f < bank.size(); ++f) {
                const auto& k = bank[f];
                const int w = 2 * k.half_a + 1;
                col_index.resize(static_cast<std::size_t>(w));
                for (int dx = -k.half_a; dx <= k.half_a; ++dx) {
                    col_index[static_cast<std::size_t>(dx + k.half_a)] = wrap(c + dx, p.cols);
                }
                Complex acc = 0;
                for (int dy = -k.half_r; dy <= k.half_r; ++dy) {
                    const double* row = &tex[static_cast<std::size_t>(std::clamp(r + dy, 0, p.rows - 1)) * p.cols];
                    const Complex* taps = &k.taps[static_cast<std::size_t>(dy + k.half_r) * w];
                    for (int x = 0; x < w; ++x) acc += taps[x] * row[col_index[static_cast<std::size_t>(x)]];
                }
                const bool live = std::abs(acc) >= kZeroResponseEpsilon;
                t.bitplanes[2 * f].set(gi, gj, live && acc.real() > 0);
                t.bitplanes[2 * f + 1].set(gi, gj, live && acc.imag() > 0);
                if (!live || !support.all_usable(r, c, k.half_r, k.half_a)) usable = false;
            }
            t.mask.set(gi, gj, usable);
        }
    }
    return t;
}

IrisTemplate encode_loggabor1d(const PolarIris& p, const LogGaborConfig& cfg) {
    cfg.validate();
    const double wl = cfg.center_wavelength > 0 ? cfg.center_wavelength : p.cols / 24.0;
    if (wl < 4.0) throw Error(ErrorCode::InvalidArgument, "center wavelength below 4 px");
    if (p.cols < 4.0 * wl) throw Error(ErrorCode::GridTooNarrow, "cols must be >= 4 * center_wavelength");

    const int n = p.cols;
    std::vector<double> transfer(static_cast<std::size_t>(n), 0.0);
    const double f0 = 1.0 / wl;
    const double denom = 2.0 * std::pow(std::log(cfg.sigma_on_f), 2);
    for (int k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) / n;
        transfer[static_cast<std::size_t>(k)] = std::exp(-std::pow(std::log(f / f0), 2) / denom);
    }

    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* spectrum = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan fwd, inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_1d(n, in, spectrum, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(n, spectrum, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    auto t = make_template(EncoderId::loggabor1d, p.rows, p.cols, 2, params_digest(cfg, p.rows, p.cols));
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < n; ++c) {
            in[c][0] = p.at(r, c);
            in[c][1] = 0.0;
        }
        fftw_execute(fwd);
        for (int k = 0; k < n; ++k) {
            spectrum[k][0] *= transfer[static_cast<std::size_t>(k)];
            spectrum[k][1] *= transfer[static_cast<std::size_t>(k)];
        }
        fftw_execute(inv);
        for (int c = 0; c < n; ++c) {
            const double re = out[c][0] / n, im = out[c][1] / n;
            const bool live = std::hypot(re, im) >= kZeroResponseEpsilon;
            t.bitplanes[0].set(r, c, live && re > 0);
            t.bitplanes[1].set(r, c, live && im > 0);
            t.mask.set(r, c, live && p.mask.at(r, c));
        }
    }

    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    fftw_free(in);
    fftw_free(spectrum);
    fftw_free(out);
    return t;
}

IrisTemplate encode_bif(const PolarIris& p, const KernelBank& bank) {
    bank.validate();
    const int k = bank.size, h = k / 2;
    if (k > std::min(p.rows, p.cols)) throw Error(ErrorCode::KernelLargerThanGrid, "kernel exceeds polar grid");

    const auto tex = row_centered_texture(p);
    const SupportChecker support(p.mask, h, h);
    auto t = make_template(EncoderId::bif, p.rows, p.cols, bank.bit_count(), params_digest(bank, p.rows, p.cols));

    std::vector<double> resp(static_cast<std::size_t>(bank.bit_count()));
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < p.cols; ++c) {
            std::fill(resp.begin(), resp.end(), 0.0);
            // true convolution: tap (i, j) meets texture at (r + h - i, c + h - j)
            for (int i = 0; i < k; ++i) {
                const double* row = &tex[static_cast<std::size_t>(std::clamp(r + h - i, 0, p.rows - 1)) * p.cols];
                for (int j = 0; j < k; ++j) {
                    const double v = row[wrap(c + h - j, p.cols)];
                    const auto tap = static_cast<std::size_t>(i * k + j);
                    for (std::size_t b = 0; b < resp.size(); ++b) resp[b] += bank.kernels[b][tap] * v;
                }
            }
            bool usable = support.all_usable(r, c, h, h);
            for (std::size_t b = 0; b < resp.size(); ++b) {
                const bool live = std::abs(resp[b]) >= kZeroResponseEpsilon;
                t.bitplanes[b].set(r, c, live && resp[b] > 0);
                if (!live) usable = false;
            }
            t.mask.set(r, c, usable);
        }
    }
    return t;
}

}  // namespace pmiris
