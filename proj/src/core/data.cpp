#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "simred/error.hpp"
#include "simred/harness.hpp"

namespace simred {

Distribution Distribution::uniform_int(std::int64_t lo, std::int64_t hi) {
  Distribution d;
  d.kind = Kind::UniformInt;
  d.int_lo = lo;
  d.int_hi = hi;
  return d;
}

Distribution Distribution::uniform_float(double lo, double hi) {
  Distribution d;
  d.kind = Kind::UniformFloat;
  d.float_lo = lo;
  d.float_hi = hi;
  return d;
}

Distribution Distribution::constant(double v) {
  Distribution d;
  d.kind = Kind::Constant;
  d.value = v;
  return d;
}

namespace {

Buffer from_doubles(DType type, const std::vector<double>& xs) {
  Buffer b(type, xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) b.set(i, Scalar::from_double(type, xs[i]));
  return b;
}

}  // namespace

Buffer generate_data(std::uint64_t n, DType type, const Distribution& dist, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  switch (dist.kind) {
    case Distribution::Kind::UniformInt: {
      if (dist.int_lo > dist.int_hi) {
        fail(ErrorCode::BadRange, "uniform_int lower bound " + std::to_string(dist.int_lo) +
                                      " exceeds upper bound " + std::to_string(dist.int_hi));
      }
      // range == 0 encodes the full 2^64 span
      const std::uint64_t range =
          static_cast<std::uint64_t>(dist.int_hi) - static_cast<std::uint64_t>(dist.int_lo) + 1;
      std::vector<std::int64_t> xs(n);
      for (auto& x : xs) {
        const std::uint64_t draw = rng();
        const std::uint64_t off =
            range == 0 ? draw
                       : static_cast<std::uint64_t>((static_cast<unsigned __int128>(draw) * range) >> 64);
        x = static_cast<std::int64_t>(static_cast<std::uint64_t>(dist.int_lo) + off);
      }
      if (type == DType::I64) return Buffer::of_i64(std::move(xs));
      std::vector<double> ds(xs.begin(), xs.end());
      return from_doubles(type, ds);
    }
    case Distribution::Kind::UniformFloat: {
      if (!is_float(type)) fail(ErrorCode::TypeMismatch, "uniform_float requires a float type");
      if (!std::isfinite(dist.float_lo) || !std::isfinite(dist.float_hi) || dist.float_lo > dist.float_hi) {
        fail(ErrorCode::BadRange, "uniform_float bounds [" + format_double(dist.float_lo) + ", " +
                                      format_double(dist.float_hi) + ") are not a finite range");
      }
      std::vector<double> xs(n);
      for (auto& x : xs) {
        const double unit = std::ldexp(static_cast<double>(rng() >> 11), -53);
        x = dist.float_lo + (dist.float_hi - dist.float_lo) * unit;
      }
      return from_doubles(type, xs);
    }
    case Distribution::Kind::Constant:
      if (type == DType::I64 && !std::isfinite(dist.value))
        fail(ErrorCode::BadRange, "constant " + format_double(dist.value) + " is not an integer");
      return from_doubles(type, std::vector<double>(n, dist.value));
  }
  fail(ErrorCode::InvalidArgument, "unknown distribution");
}

std::optional<DataFormat> parse_data_format(std::string_view name) {
  if (name == "text") return DataFormat::Text;
  if (name == "raw" || name == "raw-le") return DataFormat::RawLE;
  return std::nullopt;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoError, "error reading '" + path + "'");
  return bytes;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

Buffer parse_text(const std::string& path, const std::string& text, DType type) {
  Buffer out(type, 0);
  std::vector<std::int64_t> ints;
  std::vector<float> floats;
  std::vector<double> doubles;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    bool ok = false;
    switch (type) {
      case DType::I64: ok = parse_number(line, ints.emplace_back()); break;
      case DType::F32: ok = parse_number(line, floats.emplace_back()); break;
      case DType::F64: ok = parse_number(line, doubles.emplace_back()); break;
    }
    if (!ok) {
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": '" + std::string(line) +
                                      "' is not a valid " + std::string(to_string(type)));
    }
  }
  switch (type) {
    case DType::I64: return Buffer::of_i64(std::move(ints));
    case DType::F32: return Buffer::of_f32(std::move(floats));
    case DType::F64: return Buffer::of_f64(std::move(doubles));
  }
  return out;
}

template <typename T>
T read_le(const char* p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<T>(v);
}

template <typename T>
void write_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U v = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::size_t elem_width(DType type) { return type == DType::F32 ? 4 : 8; }

Buffer parse_raw(const std::string& path, const std::string& bytes, DType type) {
  if (bytes.size() < 8) fail(ErrorCode::IoError, "'" + path + "' is shorter than the 8-byte length header");
  const auto count = read_le<std::uint64_t>(bytes.data());
  const std::size_t width = elem_width(type);
  const std::size_t payload = bytes.size() - 8;
  if (count > payload / width || payload != count * width) {
    fail(ErrorCode::IoError, "'" + path + "' declares " + std::to_string(count) + " elements but holds " +
                                 std::to_string(payload) + " payload bytes");
  }
  const char* p = bytes.data() + 8;
  Buffer out(type, count);
  for (std::uint64_t i = 0; i < count; ++i, p += width) {
    switch (type) {
      case DType::I64: out.i64()[i] = read_le<std::int64_t>(p); break;
      case DType::F32: out.f32()[i] = read_le<float>(p); break;
      case DType::F64: out.f64()[i] = read_le<double>(p); break;
    }
  }
  return out;
}

}  // namespace

Buffer load_data(const std::string& path, DataFormat format, DType type) {
  std::string bytes = read_file(path);
  return format == DataFormat::Text ? parse_text(path, bytes, type) : parse_raw(path, bytes, type);
}

void save_data(const std::string& path, const Buffer& data, DataFormat format) {
  std::string out;
  if (format == DataFormat::Text) {
    for (std::size_t i = 0; i < data.size(); ++i) out += data.at(i).to_string() + "\n";
  } else {
    write_le<std::uint64_t>(out, data.size());
    switch (data.dtype()) {
      case DType::I64: for (auto x : data.i64()) write_le(out, x); break;
      case DType::F32: for (auto x : data.f32()) write_le(out, x); break;
      case DType::F64: for (auto x : data.f64()) write_le(out, x); break;
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size())))
    fail(ErrorCode::IoError, "cannot write '" + path + "'");
}

}  // namespace simred
