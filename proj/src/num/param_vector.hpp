#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dish::num {

struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t len = 0;
};

/// Flat parameter storage with named, disjoint segments that cover the
/// array exactly. Sub-networks address their slice by segment name.
class ParamVector {
 public:
  ParamVector() = default;

  /// Reserves a new segment at the end; returns its index.
  std::size_t add_segment(const std::string& name, std::size_t len);

  std::size_t size() const { return values_.size(); }
  std::size_t segment_count() const { return segments_.size(); }

  const ParamSegment& segment_info(std::size_t i) const { return segments_[i]; }
  const ParamSegment& segment_info(const std::string& name) const;
  bool has_segment(const std::string& name) const;

  std::span<double> segment(const std::string& name);
  std::span<const double> segment(const std::string& name) const;
  std::span<double> segment(std::size_t i);
  std::span<const double> segment(std::size_t i) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Throws if any entry is non-finite.
  void check_finite(const std::string& context) const;

  /// JSON checkpoint form: {"segments":[{"name","offset","len"}...],"values":[...]}.
  std::string to_json() const;
  static ParamVector from_json(const std::string& text);

 private:
  std::vector<double> values_;
  std::vector<ParamSegment> segments_;
};

}  // namespace dish::num
