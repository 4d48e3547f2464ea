#include "attn/error.hpp"

namespace attn {

std::string_view error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::kConfig: return "config";
    case ErrorClass::kIo: return "io";
    case ErrorClass::kNumerical: return "numerical";
    case ErrorClass::kPlacement: return "placement";
    case ErrorClass::kStructure: return "structure";
  }
  return "unknown";
}

std::string_view placement_rule_name(PlacementRule r) {
  switch (r) {
    case PlacementRule::kSiteRange: return "site_range";
    case PlacementRule::kSameTensor: return "same_tensor";
    case PlacementRule::kNotOnTerm: return "not_on_term";
    case PlacementRule::kSiteOverlap: return "site_overlap";
    case PlacementRule::kSharedTerm: return "shared_term";
    case PlacementRule::kUntruncated: return "untruncated_path";
    case PlacementRule::kShape: return "gate_shape";
  }
  return "unknown";
}

}  // namespace attn
