#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace actsense {

/// %.12g; non-finite values print as nan / inf / -inf.
std::string format_number(double x);

/// Fixed-column CSV writer. Doubles use 12 significant digits; strings are
/// quoted only when they contain a separator, quote or newline.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  template <typename... Ts>
  void row(const Ts&... cells) {
    if (sizeof...(Ts) != columns_) throw_width(sizeof...(Ts));
    bool first = true;
    ((put(cells, first), first = false), ...);
    out_ << '\n';
  }

  /// Row built at run time (must match the header width).
  void row_strings(const std::vector<std::string>& cells);

 private:
  template <typename T>
  void put(const T& v, bool first) {
    if (!first) out_ << ',';
    if constexpr (std::is_same_v<T, bool>) out_ << (v ? 1 : 0);
    else if constexpr (std::is_floating_point_v<T>) out_ << format_number(static_cast<double>(v));
    else if constexpr (std::is_integral_v<T>) out_ << v;
    else out_ << quote(std::string_view(v));
  }
  static std::string quote(std::string_view s);
  [[noreturn]] void throw_width(std::size_t got) const;

  std::ostream& out_;
  std::size_t columns_;
};

/// 64-bit FNV-1a, used for config fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t x);

}  // namespace actsense
