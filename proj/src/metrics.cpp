#include <algorithm>
#include <unordered_map>

#include "sbys/error.hpp"
#include "sbys/metrics.hpp"

namespace sbys {
namespace {

// Characters Python's str.split() treats as whitespace.
bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0d) || (c >= 0x1c && c <= 0x20) || c == 0x85 || c == 0xa0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 ||
         c == 0x202f || c == 0x205f || c == 0x3000;
}

std::unordered_map<std::u32string, std::uint64_t> ngrams(const std::u32string& chars,
                                                         std::size_t n) {
  std::unordered_map<std::u32string, std::uint64_t> counts;
  if (chars.size() < n) return counts;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[chars.substr(i, n)];
  return counts;
}

}  // namespace

std::u32string chrf_characters(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    const unsigned char b0 = byte(i);
    char32_t cp = 0xfffd;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else {
      std::size_t need = 0;
      char32_t init = 0;
      if ((b0 & 0xe0) == 0xc0) {
        need = 1;
        init = b0 & 0x1f;
      } else if ((b0 & 0xf0) == 0xe0) {
        need = 2;
        init = b0 & 0x0f;
      } else if ((b0 & 0xf8) == 0xf0) {
        need = 3;
        init = b0 & 0x07;
      }
      bool ok = need > 0 && i + need < text.size();
      if (ok) {
        char32_t acc = init;
        for (std::size_t k = 1; k <= need; ++k) {
          if ((byte(i + k) & 0xc0) != 0x80) {
            ok = false;
            break;
          }
          acc = (acc << 6) | (byte(i + k) & 0x3f);
        }
        if (ok) {
          cp = acc;
          len = need + 1;
        }
      }
    }
    if (!is_unicode_space(cp)) out.push_back(cp);
    i += len;
  }
  return out;
}

ChrfStatistics chrf_statistics(std::string_view hypothesis, std::string_view reference,
                               const ChrfConfig& config) {
  if (config.max_order < 1) throw PreconditionError("chrF max_order must be >= 1");
  const auto hyp = chrf_characters(hypothesis);
  const auto ref = chrf_characters(reference);
  ChrfStatistics stats(static_cast<std::size_t>(config.max_order));
  for (std::size_t n = 1; n <= stats.size(); ++n) {
    auto& s = stats[n - 1];
    s.hypothesis = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    s.reference = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (s.hypothesis == 0 || s.reference == 0) continue;
    const auto hyp_counts = ngrams(hyp, n);
    const auto ref_counts = ngrams(ref, n);
    for (const auto& [gram, count] : hyp_counts) {
      if (const auto it = ref_counts.find(gram); it != ref_counts.end()) {
        s.matches += std::min(count, it->second);
      }
    }
  }
  return stats;
}

double chrf_from_statistics(const ChrfStatistics& stats, const ChrfConfig& config) {
  if (config.beta <= 0) throw PreconditionError("chrF beta must be > 0");
  const double b2 = config.beta * config.beta;
  double sum = 0.0;
  int orders = 0;
  for (const auto& s : stats) {
    if (s.reference == 0) continue;
    ++orders;
    const double precision =
        s.hypothesis == 0 ? 0.0 : static_cast<double>(s.matches) / s.hypothesis;
    const double recall = static_cast<double>(s.matches) / s.reference;
    const double denom = std::max(b2 * precision + recall, config.eps);
    sum += (1.0 + b2) * precision * recall / denom;
  }
  return orders == 0 ? 0.0 : 100.0 * sum / orders;
}

double chrf_sentence(std::string_view hypothesis, std::string_view reference,
                     const ChrfConfig& config) {
  return chrf_from_statistics(chrf_statistics(hypothesis, reference, config), config);
}

double chrf_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                   const ChrfConfig& config) {
  if (pairs.empty()) throw EmptyCorpus("chrF corpus score needs at least one pair");
  ChrfStatistics total(static_cast<std::size_t>(std::max(config.max_order, 1)));
  for (const auto& [hyp, ref] : pairs) {
    const auto s = chrf_statistics(hyp, ref, config);
    for (std::size_t i = 0; i < s.size(); ++i) {
      total[i].hypothesis += s[i].hypothesis;
      total[i].reference += s[i].reference;
      total[i].matches += s[i].matches;
    }
  }
  return chrf_from_statistics(total, config);
}

}  // namespace sbys
