#include "num/param_vector.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace dish::num {

std::size_t ParamVector::add_segment(const std::string& name, std::size_t len) {
  if (has_segment(name))
    throw std::invalid_argument("ParamVector: duplicate segment '" + name + "'");
  ParamSegment seg;
  seg.name = name;
  seg.offset = values_.size();
  seg.len = len;
  segments_.push_back(seg);
  values_.resize(values_.size() + len, 0.0);
  return segments_.size() - 1;
}

bool ParamVector::has_segment(const std::string& name) const {
  for (const auto& s : segments_)
    if (s.name == name) return true;
  return false;
}

const ParamSegment& ParamVector::segment_info(const std::string& name) const {
  for (const auto& s : segments_)
    if (s.name == name) return s;
  throw std::out_of_range("ParamVector: no segment '" + name + "'");
}

std::span<double> ParamVector::segment(const std::string& name) {
  const auto& s = segment_info(name);
  return {values_.data() + s.offset, s.len};
}

std::span<const double> ParamVector::segment(const std::string& name) const {
  const auto& s = segment_info(name);
  return {values_.data() + s.offset, s.len};
}

std::span<double> ParamVector::segment(std::size_t i) {
  const auto& s = segments_.at(i);
  return {values_.data() + s.offset, s.len};
}

std::span<const double> ParamVector::segment(std::size_t i) const {
  const auto& s = segments_.at(i);
  return {values_.data() + s.offset, s.len};
}

void ParamVector::check_finite(const std::string& context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw std::runtime_error("ParamVector: non-finite value at index " +
                               std::to_string(i) + " (" + context + ")");
  }
}

std::string ParamVector::to_json() const {
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : segments_) {
    j["segments"].push_back(
        {{"name", s.name}, {"offset", s.offset}, {"len", s.len}});
  }
  j["values"] = values_;
  return j.dump();
}

ParamVector ParamVector::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ParamVector pv;
  std::size_t expect_offset = 0;
  for (const auto& js : j.at("segments")) {
    const auto offset = js.at("offset").get<std::size_t>();
    const auto len = js.at("len").get<std::size_t>();
    if (offset != expect_offset)
      throw std::runtime_error("ParamVector: segments not contiguous at '" +
                               js.at("name").get<std::string>() + "'");
    pv.add_segment(js.at("name").get<std::string>(), len);
    expect_offset = offset + len;
  }
  const auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != pv.size())
    throw std::runtime_error("ParamVector: value count " +
                             std::to_string(values.size()) +
                             " does not match segments (" +
                             std::to_string(pv.size()) + ")");
  std::copy(values.begin(), values.end(), pv.values_.begin());
  return pv;
}

}  // namespace dish::num
