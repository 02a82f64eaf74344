#pragma once

#include "pmiris/evaluation.hpp"
#include "pmiris/gallery.hpp"
#include "pmiris/metadata.hpp"
#include "pmiris/pipeline.hpp"
#include "pmiris/quality.hpp"
#include "pmiris/statistics.hpp"
#include "pmiris/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace pmiris {

using Json = nlohmann::ordered_json;

Json to_json(const Circle& c);
Circle circle_from_json(const Json& j);

/// {"pupil":{cx,cy,r},"iris":{...},"mask_path":optional}
Json segmentation_json(const Segmentation& seg, const std::optional<std::string>& mask_path = std::nullopt);
/// Circles only; the mask path, if any, is returned through mask_path.
Segmentation segmentation_from_json(const Json& j, std::optional<std::string>* mask_path = nullptr);

Json to_json(const SampleMetadata& m);
SampleMetadata metadata_from_json(const Json& j);

/// Metric keys as in metric_key(); absent metrics are null.
Json to_json(const QualityRecord& q);

/// {encoder, score, best_shift, ftm, overlap_bits, error_code}
Json pair_outcome_json(EncoderId encoder, const PairOutcome& o);

Json to_json(const Histogram& h);
Json to_json(const EvaluationSummary& s);
Json to_json(const PadSummary& s);
Json to_json(const TestResult& t);
Json to_json(const BalanceResult& b);
Json to_json(const DensityGrid& g);
/// Row-major grid with null for cells off the joint mask.
Json to_json(const Heatmap& h);

/// Identification result fields; shifts are converted to polar columns with angular_stride.
Json identify_json(const IdentifyResult& res, int angular_stride);

}  // namespace pmiris
