#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mkit/error.hpp"
#include "mkit/motion.hpp"
#include "mkit/rng.hpp"

namespace mkit {

/// One retrievable hand-motion clip: a text id, a unit-norm embedding and
/// the clip's frame count.
struct IndexEntry {
  std::string id;
  Eigen::VectorXd embedding;
  int clip_length = 0;
};

struct RetrievalResult {
  int index = -1;
  std::string id;
  double similarity = 0.0;
};

/// Embedding lookup table with exact cosine-similarity search.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  explicit EmbeddingIndex(std::vector<IndexEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  const IndexEntry& entry(int i) const { return entries_.at(static_cast<std::size_t>(i)); }

  /// Highest cosine similarity to the query; exact ties resolve to the
  /// lexicographically smallest id.
  RetrievalResult retrieve(const Eigen::VectorXd& query) const;

 private:
  std::vector<IndexEntry> entries_;
  Eigen::MatrixXd matrix_;  // dim x size, one embedding per column
};

// Index text format, one entry per line: id<TAB>length<TAB>v0 v1 ... vD-1
std::string write_index_text(const EmbeddingIndex& index);
EmbeddingIndex read_index_text(const std::string& text);
EmbeddingIndex load_index(const std::string& path);
void save_index(const EmbeddingIndex& index, const std::string& path);

// Stand-alone hand clips: "hands joints=<J> frames=<N>" then one line per
// frame of J quaternions as "w x y z".
std::string write_hand_clip_text(const std::vector<HandPose>& clip);
std::vector<HandPose> read_hand_clip_text(const std::string& text);
std::vector<HandPose> load_hand_clip(const std::string& path);
void save_hand_clip(const std::vector<HandPose>& clip, const std::string& path);

/// Fit a retrieved hand clip to target frames: equal lengths copy, longer
/// clips contribute a random window, shorter ones are upsampled joint-wise
/// with spherical interpolation.
std::vector<HandPose> fit_clip_length(const std::vector<HandPose>& clip, int target, Rng& rng);

/// Attach a hand clip to a body sequence, easing between the ambient rest
/// pose and the clip over blend_frames at both ends. The clip must match
/// the sequence frame for frame.
MotionSequence splice_hands(const MotionSequence& seq, const std::vector<HandPose>& clip,
                            const HandPose& ambient, int blend_frames = 4);

}  // namespace mkit
