#pragma once

#include "pmiris/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pmiris {

/// Responses with magnitude below this are ties: bit 0, mask 0.
inline constexpr double kZeroResponseEpsilon = 1e-9;

struct GridStride {
    int radial = 4;
    int angular = 2;
};

/// 2D complex Gabor bank. The envelope is sigma_ratio * wavelength along the
/// angle and a third of that along the radius; support is truncated at 2 sigma.
struct GaborBankConfig {
    std::vector<double> wavelengths{18.0, 27.0, 36.0};
    double sigma_ratio = 0.5;
    std::vector<double> orientations{0.0};
    GridStride grid_stride{};

    void validate() const;
};

struct LogGaborConfig {
    /// Pixels along the angle; 0 means cols / 24.
    double center_wavelength = 0.0;
    double sigma_on_f = 0.5;

    void validate() const;
};

enum class KernelSource { file, fallback };

struct KernelBank {
    int size = 0;
    std::vector<std::vector<double>> kernels;  // row-major size x size
    KernelSource source = KernelSource::fallback;

    int bit_count() const { return static_cast<int>(kernels.size()); }
    /// Throws BadKernelFile / NonZeroMeanKernel.
    void validate() const;
};

/// Text format: "k n", then n blocks of k lines of k decimals.
KernelBank parse_kernel_bank(const std::string& text);
/// Without a path: the deterministic fallback bank (8 orthonormal zero-mean 17x17 kernels).
KernelBank load_kernel_bank(const std::optional<std::filesystem::path>& path = std::nullopt);
KernelBank fallback_kernel_bank();
std::string format_kernel_bank(const KernelBank& bank);

std::uint64_t params_digest(const GaborBankConfig& cfg, int polar_rows, int polar_cols);
std::uint64_t params_digest(const LogGaborConfig& cfg, int polar_rows, int polar_cols);
std::uint64_t params_digest(const KernelBank& bank, int polar_rows, int polar_cols);

/// Two bits (sign of real, sign of imaginary) per filter per grid sample;
/// planes ordered (filter, bit). Grid samples sit at
/// (stride_r * i + stride_r / 2, stride_a * j). Throws FilterLargerThanGrid.
IrisTemplate encode_gabor2d(const PolarIris& p, const GaborBankConfig& cfg = {});

/// Row-wise circular log-Gabor filtering, phase quadrant quantized to 2 bits.
/// Throws GridTooNarrow when cols < 4 * wavelength.
IrisTemplate encode_loggabor1d(const PolarIris& p, const LogGaborConfig& cfg = {});

/// One plane per kernel: bit = 1 iff the convolution is positive (circular in
/// angle, clamped in radius). Mask is eroded by the kernel support.
IrisTemplate encode_bif(const PolarIris& p, const KernelBank& bank);

/// Angular grid stride of the encoder; template shifts times this are polar columns.
int angular_stride(EncoderId id, const GaborBankConfig& gabor);

}  // namespace pmiris
