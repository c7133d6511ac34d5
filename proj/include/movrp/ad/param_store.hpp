#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "movrp/ad/shape.hpp"

namespace movrp::ad {

struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> values;
  // Buffers such as batch-norm running statistics are stored alongside the
  // weights but are never touched by optimizers or mutation.
  bool trainable = true;
};

// Insertion-ordered, name-unique collection of parameters. Also used as the
// gradient map: a gradient store is a zeros_like() copy filled by backward().
class ParamStore {
 public:
  std::size_t add(std::string name, Shape shape, std::vector<double> values, bool trainable = true);
  std::size_t add_zeros(std::string name, Shape shape, bool trainable = true);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t scalar_count() const;
  std::size_t trainable_scalar_count() const;

  const Parameter& operator[](std::size_t slot) const { return entries_[slot]; }
  Parameter& operator[](std::size_t slot) { return entries_[slot]; }
  std::optional<std::size_t> find(std::string_view name) const;
  const Parameter& at(std::string_view name) const;
  Parameter& at(std::string_view name);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  // Concatenation of every entry in insertion order.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  // Same names, shapes and flags with all values zero.
  ParamStore zeros_like() const;

  // True when both stores have identical names, shapes and flags.
  bool same_layout(const ParamStore& other) const;

 private:
  std::vector<Parameter> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace movrp::ad
