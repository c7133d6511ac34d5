#include "movrp/ad/param_store.hpp"

#include <algorithm>

#include "movrp/common/error.hpp"

namespace movrp::ad {

std::size_t ParamStore::add(std::string name, Shape shape, std::vector<double> values, bool trainable) {
  if (values.size() != shape.size()) {
    throw ShapeError("param '" + name + "': " + std::to_string(values.size()) + " values for shape " + to_string(shape));
  }
  if (index_.contains(name)) throw Error("param '" + name + "' already exists");
  const std::size_t slot = entries_.size();
  index_.emplace(name, slot);
  entries_.push_back(Parameter{std::move(name), shape, std::move(values), trainable});
  return slot;
}

std::size_t ParamStore::add_zeros(std::string name, Shape shape, bool trainable) {
  return add(std::move(name), shape, std::vector<double>(shape.size(), 0.0), trainable);
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.values.size();
  return n;
}

std::size_t ParamStore::trainable_scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) {
    if (p.trainable) n += p.values.size();
  }
  return n;
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Parameter& ParamStore::at(std::string_view name) const {
  auto slot = find(name);
  if (!slot) throw Error("unknown parameter '" + std::string(name) + "'");
  return entries_[*slot];
}

Parameter& ParamStore::at(std::string_view name) {
  auto slot = find(name);
  if (!slot) throw Error("unknown parameter '" + std::string(name) + "'");
  return entries_[*slot];
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const auto& p : entries_) flat.insert(flat.end(), p.values.begin(), p.values.end());
  return flat;
}

void ParamStore::unflatten(std::span<const double> flat) {
  if (flat.size() != scalar_count()) {
    throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " + std::to_string(scalar_count()) +
                     " parameters");
  }
  std::size_t offset = 0;
  for (auto& p : entries_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), p.values.size(), p.values.begin());
    offset += p.values.size();
  }
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  out.entries_.reserve(entries_.size());
  for (const auto& p : entries_) {
    out.entries_.push_back(Parameter{p.name, p.shape, std::vector<double>(p.values.size(), 0.0), p.trainable});
  }
  out.index_ = index_;
  return out;
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.shape != b.shape || a.trainable != b.trainable) return false;
  }
  return true;
}

}  // namespace movrp::ad
