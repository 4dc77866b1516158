#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lvcorpus/packing.hpp"
#include "lvcorpus/rng.hpp"
#include "lvcorpus/vocab.hpp"

namespace lvcorpus {

enum class MaskScheme { span, token };
enum class MaskAction : std::uint8_t { mask = 0, random = 1, keep = 2 };

struct MaskConfig {
  MaskScheme scheme = MaskScheme::span;
  double rate = 0.30;
  double geom_p = 0.2;
  std::size_t max_span = 10;
  double mask_prob = 0.8;    // replace with <mask>
  double random_prob = 0.1;  // replace with a random non-special token; the rest keep

  /// RoBERTa-style pretraining: 30% span masking.
  static MaskConfig span_30() { return {}; }
  /// Replaced-token-detection generator input: 20% token masking, always <mask>.
  static MaskConfig rtd_generator_20() { return {MaskScheme::token, 0.20, 0.2, 10, 1.0, 0.0}; }
  /// Decay phase: 15% span masking.
  static MaskConfig decay_15() { return {MaskScheme::span, 0.15, 0.2, 10, 0.8, 0.1}; }
};

struct MaskPlan {
  std::vector<std::uint32_t> positions;  // ascending
  std::vector<MaskAction> actions;       // parallel to positions
  std::vector<TokenId> originals;        // labels, parallel to positions
  double rate = 0.0;
  MaskScheme scheme = MaskScheme::span;
  std::size_t maskable = 0;              // positions eligible for prediction
};

struct MaskedSequence {
  std::vector<TokenId> tokens;
  MaskPlan plan;
};

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const Span&) const = default;
};

/// Mean of a geometric(p) length on {1, 2, ...} truncated (renormalized) at max_span.
double truncated_geometric_mean(double geom_p, std::size_t max_span);

/// Draws truncated-geometric span lengths.
class SpanLengthSampler {
 public:
  SpanLengthSampler(double geom_p, std::size_t max_span);
  std::size_t operator()(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

/// Non-overlapping spans covering exactly `target` of `segment_length`
/// positions (the final span is clipped to the budget). Starts are uniform
/// over the positions where the drawn length still fits.
std::vector<Span> sample_spans_exact(std::size_t segment_length, std::size_t target,
                                     const SpanLengthSampler& lengths, Rng& rng);

/// Covers floor(rate * segment_length) positions, so a rate below
/// 1/segment_length yields no spans. Sorted by start.
std::vector<Span> sample_spans(std::size_t segment_length, double rate, double geom_p,
                               std::size_t max_span, Rng& rng);

/// Per-window seed derived from the run seed.
inline std::uint64_t window_seed(std::uint64_t run_seed, std::uint64_t window_index) {
  return derive_seed(run_seed, window_index);
}

/// Selects positions (never pad or special tokens; spans stay inside one
/// document segment) and applies mask/random/keep actions.
MaskedSequence apply_masking(const PackedSequence& seq, const MaskConfig& cfg,
                             const SubwordVocab& vocab, Rng& rng);

}  // namespace lvcorpus
