#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attn {

/// Machine-readable error classes; the CLI maps them onto exit codes.
enum class ErrorClass {
  kConfig = 2,
  kIo = 3,
  kNumerical = 4,
  kPlacement = 5,
  kStructure = 6,
};

std::string_view error_class_name(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::kIo, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::kNumerical, what) {}
};

/// Placement rule broken by a disentangler.
enum class PlacementRule {
  kSiteRange,      ///< sites out of range or not ordered
  kSameTensor,     ///< both sites under one lowest-layer tensor
  kNotOnTerm,      ///< no interaction term holds both sites
  kSiteOverlap,    ///< a site already carries a disentangler
  kSharedTerm,     ///< a term touches two disentanglers
  kUntruncated,    ///< every link on the tree path is untruncated
  kShape,          ///< gate does not have links (d, d, d, d)
};

std::string_view placement_rule_name(PlacementRule r);

/// A disentangler layer that violates the placement restrictions.
class PlacementError : public Error {
 public:
  PlacementError(PlacementRule rule, const std::string& what) : Error(ErrorClass::kPlacement, what), rule_(rule) {}
  PlacementRule rule() const noexcept { return rule_; }

 private:
  PlacementRule rule_;
};

/// Link/shape mismatches between tensors, terms and states.
class StructureError : public Error {
 public:
  explicit StructureError(const std::string& what) : Error(ErrorClass::kStructure, what) {}
};

}  // namespace attn
