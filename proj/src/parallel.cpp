#include "hb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "hb/types.hpp"

namespace hb {

int thread_cap() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("HB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  return hw;
}

void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_cap()), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) body(c);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

Rational parse_rational(const std::string& text) {
  auto bad = [&] { return InvalidInput("not a rational number: '" + text + "'"); };
  auto parse_int = [&](const std::string& s) -> long long {
    if (s.empty()) throw bad();
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw bad();
    }
    if (pos != s.size()) throw bad();
    return v;
  };
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long long den = parse_int(text.substr(slash + 1));
    if (den == 0) throw bad();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string frac = text.substr(dot + 1);
    if (frac.size() > 12) throw bad();
    long long scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::string whole = text.substr(0, dot);
    bool neg = !whole.empty() && whole[0] == '-';
    long long ip = (whole.empty() || whole == "-") ? 0 : parse_int(whole);
    long long fp = frac.empty() ? 0 : parse_int(frac);
    if (fp < 0) throw bad();
    return Rational(ip * scale + (neg ? -fp : fp), scale);
  }
  return Rational(parse_int(text));
}

}  // namespace hb
