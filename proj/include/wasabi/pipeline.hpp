#pragma once

#include <string>

#include "wasabi/edges.hpp"
#include "wasabi/labelmap.hpp"
#include "wasabi/matching.hpp"
#include "wasabi/wavelet.hpp"

namespace wasabi {

struct PipelineConfig {
  CleanupConfig cleanup;
  EdgeExtractionConfig edges;
  DescriptorConfig descriptor;
};

// Full per-image path: cleanup, semantic edge extraction, resampling, and
// wavelet description.  Throws UndescribableImageError when no edge survives
// filtering, so callers can skip an image instead of storing an empty entry.
ImageDescriptor describe_image(std::string image_id, const LabelMap& map,
                               const PipelineConfig& cfg = {});

}  // namespace wasabi
