#include "wasabi/pipeline.hpp"

#include <utility>

#include "wasabi/errors.hpp"

namespace wasabi {

ImageDescriptor describe_image(std::string image_id, const LabelMap& map,
                               const PipelineConfig& cfg) {
  const LabelMap cleaned = clean_label_map(map, cfg.cleanup);
  const std::vector<SemanticEdge> edges = extract_edges(cleaned, cfg.edges);
  if (edges.empty())
    throw UndescribableImageError("no semantic edge of length >= " +
                                  std::to_string(cfg.edges.min_edge_size) + " in image '" +
                                  image_id + "'");
  ImageDescriptor out;
  out.image_id = std::move(image_id);
  for (const auto& edge : edges) {
    ResampledEdge rs = resample_edge(edge, cfg.descriptor.resample_count);
    if (cfg.descriptor.normalize_coords) {
      rs.xs /= static_cast<double>(map.cols());
      rs.ys /= static_cast<double>(map.rows());
    }
    out.edges_by_class[edge.class_id].push_back(describe_edge(rs, cfg.descriptor.levels));
  }
  return out;
}

}  // namespace wasabi
