#pragma once

#include "pmiris/encoding.hpp"
#include "pmiris/error.hpp"
#include "pmiris/matching.hpp"
#include "pmiris/metadata.hpp"
#include "pmiris/normalization.hpp"
#include "pmiris/segmentation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace pmiris {

struct PipelineConfig {
    HoughConfig hough;
    int polar_rows = kDefaultPolarRows;
    int polar_cols = kDefaultPolarCols;
    GaborBankConfig gabor;
    LogGaborConfig loggabor;
    std::optional<std::filesystem::path> kernel_bank_path;
    int max_shift = 16;  // polar columns
    double overlap_floor = kDefaultOverlapFloor;
    std::uint8_t mask_threshold = 128;
    SourceChannel channel = SourceChannel::nir;
};

/// Applies `key = value` lines ('#' comments) onto cfg. Unknown keys throw InvalidArgument.
void apply_config_text(PipelineConfig& cfg, const std::string& text);
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

/// An eye image with its optional externally produced usability mask.
struct EyeCapture {
    IrisImage image;
    std::optional<IrisImage> mask;
};

/// Why a capture produced no template.
struct PipelineFailure {
    ErrorCode code;
    std::string message;
};

using EncodeOutcome = std::variant<IrisTemplate, PipelineFailure>;

struct PairOutcome {
    bool ftm = true;
    std::optional<MatchResult> match;
    int best_shift_polar = 0;
    std::optional<PipelineFailure> failure;
};

/// Segment -> rubber sheet -> encode -> match, with stage failures reported
/// as failure-to-match. Holds the kernel bank so it is loaded once.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg = {});

    const PipelineConfig& config() const { return cfg_; }
    const KernelBank& kernel_bank() const { return bank_; }

    Segmentation segment(const EyeCapture& eye) const;
    PolarIris normalize(const EyeCapture& eye, const Segmentation& seg) const;
    IrisTemplate encode(const PolarIris& polar, EncoderId encoder) const;
    /// Throws on pipeline failures; see try_encode for the FTM-safe variant.
    IrisTemplate encode(const EyeCapture& eye, EncoderId encoder) const;
    EncodeOutcome try_encode(const EyeCapture& eye, EncoderId encoder) const;

    int template_max_shift(EncoderId encoder) const;
    PairOutcome compare(const EncodeOutcome& probe, const EncodeOutcome& gallery) const;
    PairOutcome compare(const IrisTemplate& probe, const IrisTemplate& gallery) const;

    ComparisonRecord match_images(const EyeCapture& probe, const SampleMetadata& probe_meta,
                                  const EyeCapture& gallery, const SampleMetadata& gallery_meta,
                                  EncoderId encoder) const;

private:
    PipelineConfig cfg_;
    KernelBank bank_;
};

/// Loads an image (and optional mask image) from disk using the configured channel.
EyeCapture load_capture(const std::filesystem::path& image, const std::optional<std::filesystem::path>& mask,
                        SourceChannel channel);

ComparisonRecord to_record(const PairOutcome& outcome, const SampleMetadata& probe, const SampleMetadata& gallery);

}  // namespace pmiris
