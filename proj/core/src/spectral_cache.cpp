#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "droplet/error.hpp"
#include "droplet/spectral.hpp"

// Binary layout (little-endian): "DLSD", u32 version, i32 L, u8 complete,
// u8 has_vectors, u8 has_range, [f64 lo, f64 hi, u8 lo_closed, u8 hi_closed],
// f64 norm_bound, i32 sector count, then per sector i32 magnons, i64 count,
// i64 rows, i64 cols, u8 complete, values, column-major vectors.

namespace droplet {

namespace {

constexpr char kMagic[4] = {'D', 'L', 'S', 'D'};
constexpr std::uint32_t kVersion = 2;

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("spectral cache: truncated file");
  return v;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string spectral_cache_key(const ChainParams& params, std::uint64_t realization) {
  std::ostringstream desc;
  desc << std::setprecision(17) << params.delta << ',' << params.lambda << ',' << params.beta << ','
       << params.half_length << ',' << static_cast<int>(params.disorder.kind);
  std::ostringstream key;
  key << std::hex << std::setw(16) << std::setfill('0') << fnv1a(desc.str()) << '-' << std::dec
      << params.disorder.seed << '-' << realization;
  return key.str();
}

void save_spectral(const SpectralData& sd, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("spectral cache: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::int32_t>(os, sd.half_length);
  put<std::uint8_t>(os, sd.complete);
  put<std::uint8_t>(os, sd.has_vectors);
  put<std::uint8_t>(os, sd.computed_range.has_value());
  if (sd.computed_range) {
    put<double>(os, sd.computed_range->lo);
    put<double>(os, sd.computed_range->hi);
    put<std::uint8_t>(os, sd.computed_range->lo_closed);
    put<std::uint8_t>(os, sd.computed_range->hi_closed);
  }
  put<double>(os, sd.norm_bound);
  put<std::int32_t>(os, static_cast<std::int32_t>(sd.sectors.size()));
  for (const auto& s : sd.sectors) {
    put<std::int32_t>(os, s.n_magnons);
    put<std::int64_t>(os, s.values.size());
    put<std::int64_t>(os, s.vectors.rows());
    put<std::int64_t>(os, s.vectors.cols());
    put<std::uint8_t>(os, s.n_magnons < static_cast<int>(sd.sector_complete.size()) &&
                              sd.sector_complete[s.n_magnons]);
    os.write(reinterpret_cast<const char*>(s.values.data()), s.values.size() * sizeof(double));
    os.write(reinterpret_cast<const char*>(s.vectors.data()), s.vectors.size() * sizeof(double));
  }
  if (!os) throw Error("spectral cache: write failed for " + path);
}

SpectralData load_spectral(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("spectral cache: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw Error("spectral cache: bad magic in " + path);
  if (get<std::uint32_t>(is) != kVersion) throw Error("spectral cache: unsupported version in " + path);
  SpectralData sd;
  sd.half_length = get<std::int32_t>(is);
  if (sd.half_length < 1 || n_sites_of(sd.half_length) > 30) throw Error("spectral cache: bad chain length");
  sd.complete = get<std::uint8_t>(is) != 0;
  sd.has_vectors = get<std::uint8_t>(is) != 0;
  if (get<std::uint8_t>(is) != 0) {
    EnergyWindow w;
    w.lo = get<double>(is);
    w.hi = get<double>(is);
    w.lo_closed = get<std::uint8_t>(is) != 0;
    w.hi_closed = get<std::uint8_t>(is) != 0;
    sd.computed_range = w;
  }
  const double norm_bound = get<double>(is);
  sd.bases = shared_bases(sd.n_sites());
  const auto count = get<std::int32_t>(is);
  if (count != sd.n_sites() + 1) throw Error("spectral cache: wrong sector count");
  for (std::int32_t k = 0; k < count; ++k) {
    SectorSpectrum s;
    s.n_magnons = get<std::int32_t>(is);
    const auto nv = get<std::int64_t>(is);
    const auto rows = get<std::int64_t>(is);
    const auto cols = get<std::int64_t>(is);
    sd.sector_complete.push_back(get<std::uint8_t>(is) != 0);
    const auto dim = static_cast<std::int64_t>(sd.basis(k).dim());
    if (s.n_magnons != k || nv < 0 || nv > dim || (rows != 0 && rows != dim) || cols > dim) {
      throw Error("spectral cache: inconsistent sector header");
    }
    s.values.resize(nv);
    s.vectors.resize(rows, cols);
    is.read(reinterpret_cast<char*>(s.values.data()), nv * sizeof(double));
    is.read(reinterpret_cast<char*>(s.vectors.data()), rows * cols * sizeof(double));
    if (!is) throw Error("spectral cache: truncated file");
    sd.sectors.push_back(std::move(s));
  }
  // Rebuild the sorted index and clusters exactly as diagonalize does.
  sd.norm_bound = norm_bound;
  rebuild_index(sd);
  return sd;
}

}  // namespace droplet
