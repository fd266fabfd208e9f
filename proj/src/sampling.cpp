#include "regge/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

#include "regge/error.hpp"

namespace regge {

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  engine_.seed(seq);
}

std::size_t worker_count() {
  if (const char* env = std::getenv("REGGE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double box_side(const CutoffSpec& cut) { return cut.kappa - 1.0 / cut.kappa; }

std::vector<double> feasible_point(const ReflectedGeometry& geom, const CutoffSpec& cut) {
  if (!(cut.kappa > 1.0))
    throw FeasibilityError("kappa = " + std::to_string(cut.kappa) +
                           " leaves no room between the bounds 1/kappa and kappa");
  const std::size_t e = geom.edge_count();
  constexpr int kProbes = 400;
  std::vector<double> feasible;
  std::vector<double> z(e);
  for (int i = 0; i <= kProbes; ++i) {
    const double c = std::pow(cut.kappa, 2.0 * i / kProbes - 1.0);
    std::fill(z.begin(), z.end(), c);
    if (in_cutoff(geom.full(), z, cut)) feasible.push_back(c);
  }
  if (feasible.empty()) {
    std::ostringstream os;
    os << "cutoff region looks empty: no multiple c of the all-ones metric with c in [1/kappa, kappa] "
       << "satisfies det A >= 1/kappa and the " << to_string(cut.norm) << " norm bound (kappa = "
       << cut.kappa << ", " << e << " edges)";
    throw FeasibilityError(os.str());
  }
  const double c = std::sqrt(feasible.front() * feasible.back());
  std::fill(z.begin(), z.end(), c);
  if (!in_cutoff(geom.full(), z, cut)) std::fill(z.begin(), z.end(), feasible[feasible.size() / 2]);
  return z;
}

namespace {

constexpr std::uint64_t kRejectionTag = 0x52454a;  // stream tags keep purposes apart
constexpr std::uint64_t kMetropolisTag = 0x4d4348;

struct Chunk {
  std::vector<double> rows;
  std::vector<std::uint32_t> attempt;  // index of the accepting proposal within the chunk
};

}  // namespace

SampleSet sample_cutoff(const ReflectedGeometry& geom, const CutoffSpec& cut, std::size_t n_target,
                        std::uint64_t seed, const SamplerOptions& opt) {
  if (n_target == 0) throw EstimatorError("sample count must be positive");
  if (!(opt.acceptance_floor > 0.0)) throw EstimatorError("acceptance floor must be positive");
  feasible_point(geom, cut);

  const std::size_t e = geom.edge_count();
  const double lo = 1.0 / cut.kappa, hi = cut.kappa;
  SampleSet out;
  out.seed = seed;
  out.cut = cut;
  out.edge_count = e;
  out.box_volume = std::pow(box_side(cut), static_cast<double>(e));
  out.data.reserve(n_target * e);

  const std::size_t batch = std::max<std::size_t>(1, worker_count()) * 4;
  const double min_checked = 10.0 / opt.acceptance_floor;
  std::uint64_t attempts = 0;
  std::size_t accepted = 0;
  for (std::uint64_t first = 0;; first += batch) {
    std::vector<Chunk> chunks(batch);
    parallel_for(batch, [&](std::size_t b) {
      RandomStream rng(seed, first + b, kRejectionTag);
      Chunk& c = chunks[b];
      std::vector<double> z(e);
      for (std::size_t a = 0; a < opt.chunk_size; ++a) {
        for (double& v : z) v = rng.uniform(lo, hi);
        if (in_cutoff(geom.full(), z, cut)) {
          c.rows.insert(c.rows.end(), z.begin(), z.end());
          c.attempt.push_back(static_cast<std::uint32_t>(a));
        }
      }
    });
    for (const Chunk& c : chunks) {
      for (std::size_t i = 0; i < c.attempt.size(); ++i) {
        out.data.insert(out.data.end(), c.rows.begin() + static_cast<std::ptrdiff_t>(i * e),
                        c.rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * e));
        if (++accepted == n_target) {
          out.attempt_count = attempts + c.attempt[i] + 1;
          return out;
        }
      }
      attempts += opt.chunk_size;
      const double rate = static_cast<double>(accepted) / static_cast<double>(attempts);
      if (static_cast<double>(attempts) >= min_checked && rate < opt.acceptance_floor) {
        std::ostringstream os;
        os << "acceptance rate " << rate << " below floor " << opt.acceptance_floor << " after "
           << attempts << " proposals (" << accepted << " accepted, kappa = " << cut.kappa
           << ", norm = " << to_string(cut.norm) << ", " << e << " edges)";
        throw FeasibilityError(os.str());
      }
    }
  }
}

SampleSet sample_metropolis(const ReflectedGeometry& geom, const CutoffSpec& cut, std::size_t n_target,
                            std::uint64_t seed, const MetropolisOptions& opt) {
  if (n_target == 0) throw EstimatorError("sample count must be positive");
  std::vector<double> z = feasible_point(geom, cut);
  const std::size_t e = geom.edge_count();
  const double half_width = opt.step_fraction * box_side(cut);
  RandomStream rng(seed, 0, kMetropolisTag);

  SampleSet out;
  out.seed = seed;
  out.cut = cut;
  out.edge_count = e;
  out.box_volume = std::pow(box_side(cut), static_cast<double>(e));
  out.data.reserve(n_target * e);

  auto step = [&] {
    if (rng.uniform() < opt.theta_move_probability) {
      // C_κ is θ-invariant and the target is uniform: always accepted.
      z = geom.pullback(z);
      return;
    }
    const std::size_t i = static_cast<std::size_t>(rng.bits() % e);
    const double old = z[i];
    z[i] = old + half_width * (2.0 * rng.uniform() - 1.0);
    if (!in_cutoff(geom.full(), z, cut)) z[i] = old;
  };
  for (std::size_t s = 0; s < opt.burn_in; ++s) step();
  while (out.size() < n_target) {
    for (std::size_t s = 0; s < std::max<std::size_t>(opt.thin, 1); ++s) step();
    out.data.insert(out.data.end(), z.begin(), z.end());
  }
  return out;
}

namespace {

constexpr char kMagic[7] = {'R', 'P', 'S', 'A', 'M', 'P', '1'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T take(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw IoError("sample file is truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> serialize(const SampleSet& s) {
  std::vector<std::uint8_t> out;
  out.reserve(48 + s.data.size() * sizeof(double));
  out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
  put<std::uint64_t>(out, s.seed);
  put<double>(out, s.cut.kappa);
  put<std::uint8_t>(out, s.cut.norm == CutoffNorm::supremum ? 0 : 1);
  put<std::uint64_t>(out, s.edge_count);
  put<std::uint64_t>(out, s.size());
  for (double v : s.data) put<double>(out, v);
  put<std::uint64_t>(out, s.attempt_count);
  return out;
}

SampleSet deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) || !std::equal(kMagic, kMagic + sizeof(kMagic), bytes.begin()))
    throw IoError("not a sample file (bad magic)");
  std::size_t pos = sizeof(kMagic);
  SampleSet s;
  s.seed = take<std::uint64_t>(bytes, pos);
  s.cut.kappa = take<double>(bytes, pos);
  const auto norm = take<std::uint8_t>(bytes, pos);
  if (norm > 1) throw IoError("sample file has unknown norm flag " + std::to_string(norm));
  s.cut.norm = norm == 0 ? CutoffNorm::supremum : CutoffNorm::euclidean;
  s.edge_count = take<std::uint64_t>(bytes, pos);
  const auto n = take<std::uint64_t>(bytes, pos);
  if (s.edge_count == 0 || n > (bytes.size() - pos) / sizeof(double) / s.edge_count)
    throw IoError("sample file header does not match its size");
  s.data.resize(n * s.edge_count);
  for (double& v : s.data) v = take<double>(bytes, pos);
  s.attempt_count = take<std::uint64_t>(bytes, pos);
  if (pos != bytes.size()) throw IoError("trailing bytes in sample file");
  s.box_volume = std::pow(box_side(s.cut), static_cast<double>(s.edge_count));
  return s;
}

void write_samples(const std::filesystem::path& path, const SampleSet& s) {
  const auto bytes = serialize(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to " + path.string() + " failed");
}

SampleSet read_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t digest(const SampleSet& s) { return fnv1a64(serialize(s)); }

}  // namespace regge
