#include "ssdp/backends.hpp"

#include <cctype>

#include "ssdp/error.hpp"
#include "ssdp/hash.hpp"

namespace ssdp {

std::optional<std::string> answer_tail(const std::string& text,
                                       const std::string& marker) {
  if (marker.empty()) return std::nullopt;
  const size_t pos = text.rfind(marker);
  if (pos == std::string::npos) return std::nullopt;
  std::string tail = text.substr(pos + marker.size());
  size_t begin = 0;
  while (begin < tail.size() &&
         std::isspace(static_cast<unsigned char>(tail[begin]))) {
    begin += 1;
  }
  size_t end = tail.size();
  while (end > begin) {
    const char c = tail[end - 1];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == '!') {
      end -= 1;
    } else {
      break;
    }
  }
  return tail.substr(begin, end - begin);
}

HashedBowEmbeddingBackend::HashedBowEmbeddingBackend(int dim, double cost_s)
    : dim_(dim), cost_s_(cost_s) {
  if (dim < 1) throw InvalidInputError("embedding dimension must be >= 1");
}

EmbedResult HashedBowEmbeddingBackend::embed(const std::string& text) {
  Embedding v(dim_, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64(token);
    const size_t bucket = h % static_cast<std::uint64_t>(dim_);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
    token.clear();
  };
  for (char raw : text) {
    const unsigned char c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      token += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  // An all-zero vector (no tokens) cannot be normalized; give empty text a
  // fixed direction instead of failing the caller.
  bool any = false;
  for (double x : v) { if (x != 0.0) { any = true; break; } }
  if (!any) v[0] = 1.0;
  return {std::move(v), cost_s_};
}

}  // namespace ssdp
