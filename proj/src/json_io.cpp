#include "provkit/json_io.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "provkit/errors.hpp"

namespace provkit {

std::string format_real(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot serialize non-finite number");
  std::string s = fmt::format("{}", value);
  if (s.find_first_of("eE") != std::string::npos) {
    // Fixed notation keeps the padding rule simple; 17 significant digits
    // after the leading zeros always round-trip.
    s = fmt::format("{:.{}f}", value, std::max(6, 17 - static_cast<int>(std::floor(std::log10(std::fabs(value))))));
    while (s.back() == '0' && s.size() - s.find('.') > 7) s.pop_back();
    return s;
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    s += '.';
    dot = s.size() - 1;
  }
  const std::size_t decimals = s.size() - dot - 1;
  if (decimals < 6) s.append(6 - decimals, '0');
  return s;
}

std::string json_quote(std::string_view s) {
  return nlohmann::json(std::string(s)).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += fmt::format(".tmp{}.{}", std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000,
                     counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace provkit
