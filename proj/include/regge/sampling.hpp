#pragma once

// Uniform sampling of the cutoff region C_κ, seeded parallel streams and the
// persisted sample format.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "regge/action.hpp"

namespace regge {

/// One reproducible random stream, identified by (seed, stream, tag).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Threads to use: REGGE_THREADS if set to a positive integer, otherwise
/// the hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Accepted points of C_κ, row-major over the canonical edge ordering.
struct SampleSet {
  std::uint64_t seed = 0;
  CutoffSpec cut;
  std::size_t edge_count = 0;
  std::vector<double> data;
  /// Proposals drawn to obtain the points; 0 for Markov-chain samples,
  /// which carry no acceptance information.
  std::uint64_t attempt_count = 0;
  double box_volume = 0;

  std::size_t size() const { return edge_count ? data.size() / edge_count : 0; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(data).subspan(i * edge_count, edge_count);
  }
  bool from_rejection() const { return attempt_count > 0; }
};

/// Side length of the sampling box [1/κ, κ] for every edge.
double box_side(const CutoffSpec& cut);

struct SamplerOptions {
  double acceptance_floor = 1e-6;
  std::size_t chunk_size = 4096;
};

/// A point of C_κ on the ray through the all-ones metric, or
/// FeasibilityError naming the binding constraint.
std::vector<double> feasible_point(const ReflectedGeometry& geom, const CutoffSpec& cut);

/// Exactly n_target i.i.d. uniform points of C_κ by rejection from the box.
/// Chunk c of proposals uses stream (seed, c), so the result does not
/// depend on the thread count.
SampleSet sample_cutoff(const ReflectedGeometry& geom, const CutoffSpec& cut, std::size_t n_target,
                        std::uint64_t seed, const SamplerOptions& opt = {});

struct MetropolisOptions {
  std::size_t burn_in = 2000;
  std::size_t thin = 20;
  /// Random-walk half-width as a fraction of the box side.
  double step_fraction = 0.2;
  /// Probability of proposing z -> θz instead of a coordinate move.
  double theta_move_probability = 0.1;
};

/// Random-walk Metropolis chain targeting the uniform measure on C_κ.
/// Proposals outside C_κ are always rejected. Single chain, sequential.
SampleSet sample_metropolis(const ReflectedGeometry& geom, const CutoffSpec& cut, std::size_t n_target,
                            std::uint64_t seed, const MetropolisOptions& opt = {});

/// Binary layout: "RPSAMP1", seed u64, κ f64, norm u8 (0 sup, 1 l2),
/// edge count u64, N u64, N·E f64 row-major, attempt count u64.
/// Little-endian host order.
std::vector<std::uint8_t> serialize(const SampleSet& s);
SampleSet deserialize(std::span<const std::uint8_t> bytes);
void write_samples(const std::filesystem::path& path, const SampleSet& s);
SampleSet read_samples(const std::filesystem::path& path);

/// FNV-1a 64 of the serialized bytes.
std::uint64_t digest(const SampleSet& s);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace regge
