#include "lvcorpus/masking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lvcorpus {

namespace {

void check_config(const MaskConfig& cfg) {
  if (!(cfg.rate >= 0.0 && cfg.rate <= 1.0)) throw std::invalid_argument("mask rate must lie in [0, 1]");
  if (!(cfg.mask_prob >= 0.0 && cfg.random_prob >= 0.0 && cfg.mask_prob + cfg.random_prob <= 1.0 + 1e-12)) {
    throw std::invalid_argument("mask_prob + random_prob must lie in [0, 1]");
  }
}

bool range_free(const std::vector<char>& used, std::size_t start, std::size_t len) {
  for (std::size_t p = start; p < start + len; ++p) {
    if (used[p]) return false;
  }
  return true;
}

}  // namespace

double truncated_geometric_mean(double geom_p, std::size_t max_span) {
  double num = 0.0, den = 0.0, w = geom_p;
  for (std::size_t l = 1; l <= max_span; ++l) {
    num += static_cast<double>(l) * w;
    den += w;
    w *= 1.0 - geom_p;
  }
  return num / den;
}

SpanLengthSampler::SpanLengthSampler(double geom_p, std::size_t max_span) {
  if (!(geom_p > 0.0 && geom_p < 1.0)) throw std::invalid_argument("geom_p must lie in (0, 1)");
  if (max_span < 1) throw std::invalid_argument("max_span must be >= 1");
  cdf_.resize(max_span);
  double w = geom_p, acc = 0.0;
  for (auto& c : cdf_) {
    acc += w;
    c = acc;
    w *= 1.0 - geom_p;
  }
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

std::size_t SpanLengthSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1;
}

std::vector<Span> sample_spans_exact(std::size_t segment_length, std::size_t target,
                                     const SpanLengthSampler& lengths, Rng& rng) {
  target = std::min(target, segment_length);
  std::vector<Span> spans;
  std::vector<char> used(segment_length, 0);
  std::size_t covered = 0;
  constexpr int kAttempts = 32;
  while (covered < target) {
    std::size_t len = std::min(lengths(rng), target - covered);
    bool placed = false;
    for (int a = 0; a < kAttempts && !placed; ++a) {
      const std::size_t s = rng.below(segment_length - len + 1);
      if (range_free(used, s, len)) {
        spans.push_back({s, len});
        placed = true;
      }
    }
    if (!placed) {
      // Crowded segment: pick uniformly among starts that still fit, shrinking
      // the span to the longest free run when nothing fits.
      std::vector<std::size_t> starts;
      auto collect = [&] {
        starts.clear();
        for (std::size_t s = 0; s + len <= segment_length; ++s) {
          if (range_free(used, s, len)) starts.push_back(s);
        }
      };
      collect();
      if (starts.empty()) {
        std::size_t best = 0, run = 0;
        for (const char u : used) {
          run = u ? 0 : run + 1;
          best = std::max(best, run);
        }
        len = best;
        collect();
      }
      spans.push_back({starts[rng.below(starts.size())], len});
    }
    const Span& sp = spans.back();
    std::fill(used.begin() + static_cast<std::ptrdiff_t>(sp.start),
              used.begin() + static_cast<std::ptrdiff_t>(sp.start + sp.length), 1);
    covered += sp.length;
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  return spans;
}

std::vector<Span> sample_spans(std::size_t segment_length, double rate, double geom_p,
                               std::size_t max_span, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("rate must lie in [0, 1]");
  const SpanLengthSampler lengths(geom_p, max_span);
  const auto target =
      static_cast<std::size_t>(std::floor(rate * static_cast<double>(segment_length) + 1e-9));
  return sample_spans_exact(segment_length, target, lengths, rng);
}

MaskedSequence apply_masking(const PackedSequence& seq, const MaskConfig& cfg,
                             const SubwordVocab& vocab, Rng& rng) {
  check_config(cfg);
  const std::size_t real = seq.tokens.size() - seq.pad_count;
  auto maskable = [&](std::size_t p) { return p < real && !vocab.is_special(seq.tokens[p]); };

  MaskedSequence out;
  out.tokens = seq.tokens;
  out.plan.rate = cfg.rate;
  out.plan.scheme = cfg.scheme;
  std::vector<std::uint32_t> chosen;

  if (cfg.scheme == MaskScheme::token) {
    std::vector<std::uint32_t> cand;
    for (std::size_t p = 0; p < real; ++p) {
      if (maskable(p)) cand.push_back(static_cast<std::uint32_t>(p));
    }
    out.plan.maskable = cand.size();
    const auto target = static_cast<std::size_t>(
        std::floor(cfg.rate * static_cast<double>(cand.size()) + 0.5));
    for (std::size_t k = 0; k < target; ++k) {
      const std::size_t j = k + rng.below(cand.size() - k);
      std::swap(cand[k], cand[j]);
    }
    chosen.assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(target));
  } else {
    const SpanLengthSampler lengths(cfg.geom_p, cfg.max_span);
    double carry = 0.5;  // rounds the window total instead of truncating each run
    for (const auto& seg : seq.doc_boundaries) {
      std::size_t p = seg.start;
      while (p < seg.end) {
        while (p < seg.end && !maskable(p)) ++p;
        const std::size_t run_start = p;
        while (p < seg.end && maskable(p)) ++p;
        const std::size_t run = p - run_start;
        if (run == 0) continue;
        out.plan.maskable += run;
        const double quota = cfg.rate * static_cast<double>(run) + carry;
        const auto target = static_cast<std::size_t>(std::floor(quota));
        carry = quota - static_cast<double>(target);
        for (const Span& s : sample_spans_exact(run, target, lengths, rng)) {
          for (std::size_t k = 0; k < s.length; ++k) {
            chosen.push_back(static_cast<std::uint32_t>(run_start + s.start + k));
          }
        }
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());

  const TokenId mask_id = vocab.specials().mask;
  out.plan.positions = std::move(chosen);
  out.plan.actions.reserve(out.plan.positions.size());
  out.plan.originals.reserve(out.plan.positions.size());
  for (const std::uint32_t p : out.plan.positions) {
    out.plan.originals.push_back(seq.tokens[p]);
    const double u = rng.uniform();
    MaskAction action = MaskAction::keep;
    if (u < cfg.mask_prob) {
      action = MaskAction::mask;
      out.tokens[p] = mask_id;
    } else if (u < cfg.mask_prob + cfg.random_prob) {
      action = MaskAction::random;
      TokenId r;
      do {
        r = static_cast<TokenId>(rng.below(vocab.size()));
      } while (vocab.is_special(r));
      out.tokens[p] = r;
    }
    out.plan.actions.push_back(action);
  }
  return out;
}

}  // namespace lvcorpus
