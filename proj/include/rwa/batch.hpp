#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rwa/distributions.hpp"
#include "rwa/error.hpp"
#include "rwa/rng.hpp"

namespace rwa {

/// Column-oriented block of simplex-valued samples, tagged with the stream that produced it.
class SampleBatch {
 public:
  SampleBatch(std::size_t dim, std::size_t count, std::uint64_t seed, std::uint64_t stream_id,
              std::string label = {})
      : columns_(dim, std::vector<double>(count)),
        seed_(seed),
        stream_id_(stream_id),
        label_(std::move(label)) {
    detail::require(dim > 0, "sample batch needs at least one coordinate");
  }

  std::size_t dim() const noexcept { return columns_.size(); }
  std::size_t size() const noexcept { return columns_.front().size(); }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> column(std::size_t j) const { return columns_.at(j); }
  std::span<double> column(std::size_t j) { return columns_.at(j); }

  double at(std::size_t row, std::size_t j) const { return columns_[j][row]; }

  void set_row(std::size_t row, std::span<const double> values) {
    for (std::size_t j = 0; j < columns_.size(); ++j) columns_[j][row] = values[j];
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::vector<std::vector<double>> columns_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::string label_;
};

/// `count` iid Dirichlet draws from a single stream.
inline SampleBatch sample_dirichlet_batch(const DirichletParams& p, std::size_t count,
                                          RngStream rng) {
  SampleBatch batch(p.size(), count, rng.seed(), rng.stream_id(), "dirichlet");
  for (std::size_t i = 0; i < count; ++i) batch.set_row(i, sample_dirichlet(p, rng).coords());
  return batch;
}

}  // namespace rwa
