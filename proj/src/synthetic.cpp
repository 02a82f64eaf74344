#include "pmiris/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pmiris::synth {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double gaussian(std::mt19937_64& rng) {
    const double u1 = uniform01(rng) + 0x1.0p-54, u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t hash2(int x, int y) {
    std::uint32_t h = static_cast<std::uint32_t>(x) * 0x8da6b343u ^ static_cast<std::uint32_t>(y) * 0xd8163841u;
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    h ^= h >> 15;
    return h;
}

// Eyelid line y_cut so that the annulus area above it is `fraction` of the annulus.
double eyelid_cut(const CaptureParams& p) {
    if (p.occlusion_fraction <= 0) return -1e9;
    auto covered = [&](double cut) {
        // integrate the annulus chord length over y < cut
        double area = 0;
        for (double y = p.cy - p.iris_r; y < cut; y += 0.25) {
            const double dy = y - p.cy;
            const double outer = std::sqrt(std::max(0.0, p.iris_r * p.iris_r - dy * dy));
            const double inner = std::sqrt(std::max(0.0, p.pupil_r * p.pupil_r - dy * dy));
            area += 2.0 * (outer - inner) * 0.25;
        }
        return area / (std::numbers::pi * (p.iris_r * p.iris_r - p.pupil_r * p.pupil_r));
    };
    double lo = p.cy - p.iris_r, hi = p.cy + p.iris_r;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (covered(mid) < p.occlusion_fraction ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

IrisPattern IrisPattern::random(std::uint64_t seed, int wave_count) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
    IrisPattern pat;
    const double amp = 18.0 * std::sqrt(2.0 / wave_count);
    for (int i = 0; i < wave_count; ++i) {
        Wave w;
        w.angular_cycles = 6 + static_cast<int>(uniform01(rng) * 35);
        w.radial_cycles = 3.0 * uniform01(rng);
        w.phase = 2.0 * std::numbers::pi * uniform01(rng);
        w.amplitude = amp * (0.5 + uniform01(rng));
        pat.waves.push_back(w);
    }
    return pat;
}

double IrisPattern::value(double rho, double theta) const {
    double v = base;
    for (const auto& w : waves) {
        v += w.amplitude * std::cos(w.angular_cycles * theta + 2.0 * std::numbers::pi * w.radial_cycles * rho + w.phase);
    }
    return v;
}

RenderedEye render_eye(const IrisPattern& pattern, const CaptureParams& p, std::string id) {
    std::vector<double> img(static_cast<std::size_t>(p.width) * p.height);
    std::vector<std::uint8_t> mask(img.size(), 255);
    const double cut = eyelid_cut(p);

    auto shade = [&](double x, double y) {
        const double dx = x - p.cx, dy = y - p.cy;
        const double d = std::hypot(dx, dy);
        if (d < p.pupil_r) return p.pupil_level;
        if (d > p.iris_r) return p.sclera_level;
        const double rho = (d - p.pupil_r) / (p.iris_r - p.pupil_r);
        return pattern.value(rho, std::atan2(dy, dx) - p.rotation);
    };

    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            const double d = std::hypot(x - p.cx, y - p.cy);
            double v;
            if (std::abs(d - p.pupil_r) < 1.5 || std::abs(d - p.iris_r) < 1.5) {
                v = 0;
                for (int sy = 0; sy < 4; ++sy) {
                    for (int sx = 0; sx < 4; ++sx) v += shade(x - 0.375 + 0.25 * sx, y - 0.375 + 0.25 * sy);
                }
                v /= 16.0;
            } else {
                v = shade(x, y);
            }
            if (p.fine_texture && d >= p.pupil_r && d <= p.iris_r) v += static_cast<double>(hash2(x, y) % 121) - 60.0;
            if (y < cut) {
                v = p.eyelid_level;
                mask[static_cast<std::size_t>(y) * p.width + x] = 0;
            }
            img[static_cast<std::size_t>(y) * p.width + x] = v;
        }
    }

    if (p.noise_sigma > 0) {
        std::mt19937_64 rng(p.noise_seed);
        for (auto& v : img) v += p.noise_sigma * gaussian(rng);
    }
    std::vector<std::uint8_t> px(img.size());
    std::transform(img.begin(), img.end(), px.begin(),
                   [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); });
    return {IrisImage(id, p.width, p.height, std::move(px)), IrisImage(id + "_mask", p.width, p.height, std::move(mask))};
}

IrisImage render_disks(int width, int height, double cx, double cy, double pupil_r, double iris_r) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            px[static_cast<std::size_t>(y) * width + x] = d <= pupil_r ? 0 : (d <= iris_r ? 128 : 255);
        }
    }
    return IrisImage("disks", width, height, std::move(px));
}

IrisImage box_blur5(const IrisImage& img) {
    const int w = img.width(), h = img.height();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int s = 0;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) s += img.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
            }
            out[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>((s + 12) / 25);
        }
    }
    return IrisImage(img.id() + "_blur", w, h, std::move(out), img.source_channel());
}

}  // namespace pmiris::synth
