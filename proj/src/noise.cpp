#include "fracwave/noise.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fracwave/errors.hpp"

namespace fracwave {
namespace {

constexpr char kMagic[8] = {'F', 'W', 'N', 'O', 'I', 'S', 'E', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw std::runtime_error("truncated noise dump");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

// 53 random bits mapped to (0, 1].
double unit_open_left(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

double inverse_cube_sigma(std::size_t k, double /*t*/) {
  const double kk = static_cast<double>(k);
  return 1.0 / (kk * kk * kk);
}

void NoiseSpec::validate() const {
  if (!sigma) throw DomainError("noise sigma function is empty");
  if (modes == 0) throw DomainError("noise needs at least one mode");
  if (n_cutoff > modes) throw DomainError("noise cutoff n must not exceed the number of modes");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("noise horizon T must be positive");
  if (fine_steps == 0) throw DomainError("noise needs at least one fine step");
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NoisePaths::NoisePaths(Matrix increments, double dt, std::uint64_t seed)
    : increments_(std::move(increments)), dt_(dt), seed_(seed) {
  if (!(dt > 0.0)) throw DomainError("noise time step must be positive");
}

NoisePaths NoisePaths::generate(const NoiseSpec& spec, std::uint64_t seed, std::size_t entry_cap) {
  spec.validate();
  const std::size_t modes = spec.modes;
  const std::size_t steps = spec.fine_steps;
  if (steps > entry_cap / modes) {
    std::ostringstream os;
    os << "noise matrix " << modes << " x " << steps << " exceeds the cap of " << entry_cap
       << " entries";
    throw ResourceError(os.str());
  }
  const double dt = spec.fine_dt();
  const double scale = std::sqrt(dt);
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                            static_cast<std::uint32_t>(seed >> 32)};
  Matrix inc(modes, steps);
  for (std::size_t row = 0; row < modes; ++row) {
    const std::uint64_t k = row + 1;
    double* out = inc.row(static_cast<Eigen::Index>(row)).data();
    // One Philox block yields two Box-Muller normals for cells 2b and 2b+1.
    for (std::size_t b = 0; 2 * b < steps; ++b) {
      const auto r = philox4x32({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                                 static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)},
                                key);
      const double u1 = unit_open_left(r[0], r[1]);
      const double u2 = unit_open_left(r[2], r[3]);
      const double radius = std::sqrt(-2.0 * std::log(u1)) * scale;
      const double angle = 2.0 * std::numbers::pi * u2;
      out[2 * b] = radius * std::cos(angle);
      if (2 * b + 1 < steps) out[2 * b + 1] = radius * std::sin(angle);
    }
  }
  return NoisePaths(std::move(inc), dt, seed);
}

NoisePaths NoisePaths::coarsen(std::size_t factor) const {
  if (factor == 0 || steps() % factor != 0) {
    std::ostringstream os;
    os << "coarsening factor " << factor << " does not divide " << steps() << " steps";
    throw GridError(os.str());
  }
  if (factor == 1) return *this;
  const std::size_t coarse = steps() / factor;
  Matrix out(modes(), coarse);
  for (Eigen::Index k = 0; k < increments_.rows(); ++k) {
    const double* in = increments_.row(k).data();
    for (std::size_t j = 0; j < coarse; ++j) {
      double s = 0.0;
      for (std::size_t i = j * factor; i < (j + 1) * factor; ++i) s += in[i];
      out(k, static_cast<Eigen::Index>(j)) = s;
    }
  }
  return NoisePaths(std::move(out), dt_ * static_cast<double>(factor), seed_);
}

void NoisePaths::check_indices(std::size_t k, std::size_t i) const {
  if (k < 1 || k > modes() || i >= steps()) {
    std::ostringstream os;
    os << "noise index (k=" << k << ", i=" << i << ") outside " << modes() << " modes x "
       << steps() << " steps";
    throw std::out_of_range(os.str());
  }
}

double NoisePaths::increment(std::size_t k, std::size_t i) const {
  check_indices(k, i);
  return increments_(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(i));
}

double NoisePaths::normalized_xi(std::size_t k, std::size_t i) const {
  return increment(k, i) / std::sqrt(dt_);
}

double NoisePaths::path_value(std::size_t k, std::size_t node) const {
  if (node == 0) {
    check_indices(k, 0);
    return 0.0;
  }
  check_indices(k, node - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < node; ++i) {
    s += increments_(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(i));
  }
  return s;
}

void NoisePaths::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, static_cast<std::uint32_t>(modes()));
  put_u32(os, static_cast<std::uint32_t>(steps()));
  for (Eigen::Index k = 0; k < increments_.rows(); ++k) {
    for (Eigen::Index i = 0; i < increments_.cols(); ++i) {
      put_u64(os, std::bit_cast<std::uint64_t>(increments_(k, i)));
    }
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

NoisePaths NoisePaths::load(const std::filesystem::path& path, double horizon) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error(path.string() + " is not a noise dump");
  }
  const auto modes = static_cast<Eigen::Index>(get_le(is, 4));
  const auto steps = static_cast<Eigen::Index>(get_le(is, 4));
  if (modes == 0 || steps == 0) throw std::runtime_error("empty noise dump " + path.string());
  Matrix inc(modes, steps);
  for (Eigen::Index k = 0; k < modes; ++k) {
    for (Eigen::Index i = 0; i < steps; ++i) {
      inc(k, i) = std::bit_cast<double>(get_le(is, 8));
    }
  }
  return NoisePaths(std::move(inc), horizon / static_cast<double>(steps));
}

}  // namespace fracwave
