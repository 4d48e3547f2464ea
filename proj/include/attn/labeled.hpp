#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "attn/error.hpp"
#include "attn/tensor.hpp"

namespace attn {

// Tensor whose links carry names; contraction pairs every shared name.
struct Labeled {
  Tensor t;
  std::vector<std::string> labels;

  Labeled() = default;
  Labeled(Tensor tensor, std::vector<std::string> names) : t(std::move(tensor)), labels(std::move(names)) {
    if (labels.size() != t.rank()) throw StructureError("Labeled: one label per link required");
  }

  std::size_t axis(const std::string& name) const {
    auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) throw StructureError("Labeled: no link named " + name);
    return static_cast<std::size_t>(it - labels.begin());
  }
  bool has(const std::string& name) const { return std::find(labels.begin(), labels.end(), name) != labels.end(); }
  std::size_t dim(const std::string& name) const { return t.dim(axis(name)); }

  Labeled ordered(const std::vector<std::string>& names) const {
    std::vector<std::size_t> perm;
    for (const auto& n : names) perm.push_back(axis(n));
    if (perm.size() != labels.size()) throw StructureError("Labeled: incomplete link order");
    return {t.permute(perm), names};
  }

  /// Removes links of dimension one.
  Labeled squeezed() const {
    Shape shape;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (t.dim(k) != 1) {
        shape.push_back(t.dim(k));
        names.push_back(labels[k]);
      }
    return {t.reshape(shape), names};
  }
};

inline Labeled operator*(const Labeled& a, const Labeled& b) {
  std::vector<AxisPair> pairs;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
    if (it != b.labels.end()) {
      pairs.emplace_back(i, static_cast<std::size_t>(it - b.labels.begin()));
    } else {
      names.push_back(a.labels[i]);
    }
  }
  for (const auto& n : b.labels)
    if (!a.has(n)) names.push_back(n);
  return {contract(a.t, b.t, pairs), names};
}

inline Labeled delta(const std::string& x, const std::string& y, std::size_t dim) {
  return {Tensor::identity(dim), {x, y}};
}

}  // namespace attn
