#include "mkit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mkit/sync.hpp"

namespace mkit {

EmbeddingIndex::EmbeddingIndex(std::vector<IndexEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) return;

  const int dim = static_cast<int>(entries_.front().embedding.size());
  if (dim == 0) throw Error(Errc::BadParams, "embeddings must be non-empty");

  std::set<std::string> ids;
  matrix_.resize(dim, static_cast<int>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const IndexEntry& e = entries_[i];
    if (e.embedding.size() != dim) {
      throw Error(Errc::DimensionMismatch, "entry '" + e.id + "' has a different embedding size");
    }
    if (std::abs(e.embedding.norm() - 1.0) > 1e-6) {
      throw Error(Errc::BadParams, "entry '" + e.id + "' is not unit-norm");
    }
    if (e.clip_length < 1) {
      throw Error(Errc::BadParams, "entry '" + e.id + "' has a non-positive clip length");
    }
    if (!ids.insert(e.id).second) {
      throw Error(Errc::BadParams, "duplicate clip id '" + e.id + "'");
    }
    matrix_.col(static_cast<int>(i)) = e.embedding;
  }
}

RetrievalResult EmbeddingIndex::retrieve(const Eigen::VectorXd& query) const {
  if (entries_.empty()) throw Error(Errc::EmptyIndex, "retrieval over an empty index");
  if (query.size() != matrix_.rows()) {
    throw Error(Errc::DimensionMismatch, "query size does not match the index");
  }
  const double norm = query.norm();
  if (norm == 0.0) throw Error(Errc::BadParams, "query vector is zero");

  const Eigen::VectorXd sims = matrix_.transpose() * (query / norm);
  int best = 0;
  for (int i = 1; i < size(); ++i) {
    if (sims(i) > sims(best) || (sims(i) == sims(best) && entries_[i].id < entries_[best].id)) {
      best = i;
    }
  }
  return {best, entries_[best].id, sims(best)};
}

std::string write_index_text(const EmbeddingIndex& index) {
  std::string out;
  char buf[40];
  for (int i = 0; i < index.size(); ++i) {
    const IndexEntry& e = index.entry(i);
    out += e.id;
    out += '\t';
    out += std::to_string(e.clip_length);
    out += '\t';
    for (int d = 0; d < e.embedding.size(); ++d) {
      if (d > 0) out += ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", e.embedding(d));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

EmbeddingIndex read_index_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<IndexEntry> entries;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 = (tab1 == std::string::npos) ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error(Errc::ParseError, "index line " + std::to_string(line_no) + " needs two tabs");
    }

    IndexEntry e;
    e.id = line.substr(0, tab1);
    try {
      e.clip_length = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
    } catch (const std::exception&) {
      throw Error(Errc::ParseError, "bad clip length on line " + std::to_string(line_no));
    }

    std::istringstream vals(line.substr(tab2 + 1));
    std::vector<double> v;
    double x;
    while (vals >> x) {
      if (!std::isfinite(x)) throw Error(Errc::ParseError, "non-finite embedding value");
      v.push_back(x);
    }
    if (v.empty()) throw Error(Errc::ParseError, "empty embedding on line " + std::to_string(line_no));
    e.embedding = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
    entries.push_back(std::move(e));
  }
  return EmbeddingIndex(std::move(entries));
}

EmbeddingIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_index_text(buf.str());
}

void save_index(const EmbeddingIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << write_index_text(index);
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

std::string write_hand_clip_text(const std::vector<HandPose>& clip) {
  if (clip.empty()) throw Error(Errc::EmptyInput, "cannot write an empty clip");
  std::string out = "hands joints=" + std::to_string(clip.front().size()) +
                    " frames=" + std::to_string(clip.size()) + "\n";
  char buf[40];
  for (const auto& pose : clip) {
    if (pose.size() != clip.front().size()) {
      throw Error(Errc::LengthMismatch, "clip frames differ in joint count");
    }
    bool first = true;
    for (const auto& q : pose) {
      const double vals[4] = {q.w(), q.x(), q.y(), q.z()};
      for (double v : vals) {
        if (!first) out += ' ';
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out += buf;
        first = false;
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<HandPose> read_hand_clip_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "empty hand clip");

  int joints = 0, frames = 0;
  if (std::sscanf(line.c_str(), "hands joints=%d frames=%d", &joints, &frames) != 2) {
    throw Error(Errc::ParseError, "bad hand clip header: " + line);
  }
  if (joints <= 0 || frames <= 0) throw Error(Errc::ParseError, "bad hand clip dimensions");

  std::vector<HandPose> clip(static_cast<std::size_t>(frames));
  for (auto& pose : clip) {
    if (!std::getline(in, line)) throw Error(Errc::ParseError, "truncated hand clip");
    std::istringstream row(line);
    pose.resize(static_cast<std::size_t>(joints));
    for (auto& q : pose) {
      double w, x, y, z;
      if (!(row >> w >> x >> y >> z)) throw Error(Errc::ParseError, "short hand clip row");
      if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
        throw Error(Errc::ParseError, "non-finite hand clip value");
      }
      q = Eigen::Quaterniond(w, x, y, z);
    }
    std::string extra;
    if (row >> extra) throw Error(Errc::ParseError, "trailing values in hand clip row");
  }
  return clip;
}

std::vector<HandPose> load_hand_clip(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_hand_clip_text(buf.str());
}

void save_hand_clip(const std::vector<HandPose>& clip, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out << write_hand_clip_text(clip);
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

std::vector<HandPose> fit_clip_length(const std::vector<HandPose>& clip, int target, Rng& rng) {
  if (clip.empty()) throw Error(Errc::EmptyInput, "cannot fit an empty clip");
  if (target < 2) throw Error(Errc::BadLength, "target length must be at least 2");

  const int n = static_cast<int>(clip.size());
  if (n == target) return clip;

  if (n > target) {
    const int start = rng.uniform_int(0, n - target);
    return std::vector<HandPose>(clip.begin() + start, clip.begin() + start + target);
  }

  // Upsample: joint-wise spherical interpolation along the clip.
  std::vector<HandPose> out(static_cast<std::size_t>(target));
  for (int i = 0; i < target; ++i) {
    if (n == 1) {
      out[static_cast<std::size_t>(i)] = clip.front();
      continue;
    }
    const double t = static_cast<double>(i) * (n - 1) / (target - 1);
    int i0 = static_cast<int>(std::floor(t));
    if (i0 > n - 2) i0 = n - 2;
    const double u = t - i0;
    const HandPose& p0 = clip[static_cast<std::size_t>(i0)];
    const HandPose& p1 = clip[static_cast<std::size_t>(i0 + 1)];
    if (p0.size() != p1.size()) throw Error(Errc::LengthMismatch, "clip frames differ in joint count");
    HandPose pose(p0.size());
    for (std::size_t j = 0; j < p0.size(); ++j) pose[j] = slerp(p0[j], p1[j], u);
    out[static_cast<std::size_t>(i)] = std::move(pose);
  }
  return out;
}

MotionSequence splice_hands(const MotionSequence& seq, const std::vector<HandPose>& clip,
                            const HandPose& ambient, int blend_frames) {
  const int n = seq.length();
  if (static_cast<int>(clip.size()) != n) {
    throw Error(Errc::LengthMismatch, "hand clip length does not match the sequence");
  }
  if (blend_frames < 0) throw Error(Errc::BadParams, "blend_frames must be non-negative");
  if (n == 0) throw Error(Errc::EmptyInput, "cannot splice into an empty sequence");

  const int blend = std::min(blend_frames, n / 2);
  MotionSequence out = seq;
  out.hands.emplace(static_cast<std::size_t>(n));
  for (int f = 0; f < n; ++f) {
    const HandPose& pose = clip[static_cast<std::size_t>(f)];
    if (pose.size() != ambient.size()) {
      throw Error(Errc::LengthMismatch, "clip and ambient pose differ in joint count");
    }
    double t = 1.0;
    if (f < blend) {
      t = static_cast<double>(f + 1) / (blend + 1);
    } else if (f >= n - blend) {
      t = static_cast<double>(n - f) / (blend + 1);
    }
    HandPose& dst = (*out.hands)[static_cast<std::size_t>(f)];
    if (t >= 1.0) {
      dst = pose;
    } else {
      dst.resize(pose.size());
      for (std::size_t j = 0; j < pose.size(); ++j) dst[j] = slerp(ambient[j], pose[j], t);
    }
  }
  return out;
}

}  // namespace mkit
