#pragma once

// Trace CSV export and binary state snapshots.
//
// CSV: header t,sup_u,l2_u,l2_w,l2_grad_u,energy,b followed by the appended
// diagnostics kinetic,potential,dissipation,q,lp1; one row per sample,
// shortest round-trip decimal formatting.
//
// Snapshot: uint64 J, float64 t, float64 u[J], float64 w[J], little-endian.

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dampwave/diagnostics.hpp"

namespace dampwave {

inline constexpr const char* trace_csv_header = "t,sup_u,l2_u,l2_w,l2_grad_u,energy,b,kinetic,potential,dissipation,q,lp1";

/// Shortest decimal that round-trips.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline void write_trace_csv(std::ostream& os, const EnergyTrace& et) {
  os << trace_csv_header << '\n';
  for (const auto& s : et.samples) {
    const double row[] = {s.t,      s.sup_u,  s.l2_u,      s.l2_w,        s.l2_grad_u, s.energy,
                          s.b,      s.kinetic, s.potential, s.dissipation, s.q,         s.lp1};
    bool first = true;
    for (const double v : row) {
      if (!first) os << ',';
      os << format_double(v);
      first = false;
    }
    os << '\n';
  }
}

namespace detail {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    return std::bit_cast<T>(bytes);
  }
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("snapshot: truncated input");
  return to_little(v);
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const State& s) {
  if (s.u.size() != s.w.size()) throw std::invalid_argument("snapshot: u and w lengths differ");
  detail::put<std::uint64_t>(os, s.u.size());
  detail::put<double>(os, s.t);
  for (const double v : s.u) detail::put<double>(os, v);
  for (const double v : s.w) detail::put<double>(os, v);
  if (!os) throw std::runtime_error("snapshot: write failed");
}

inline State read_snapshot(std::istream& is) {
  const auto J = detail::get<std::uint64_t>(is);
  if (J > (std::uint64_t{1} << 32)) throw std::runtime_error("snapshot: implausible length");
  State s;
  s.t = detail::get<double>(is);
  s.u.resize(J);
  s.w.resize(J);
  for (auto& v : s.u) v = detail::get<double>(is);
  for (auto& v : s.w) v = detail::get<double>(is);
  return s;
}

}  // namespace dampwave
