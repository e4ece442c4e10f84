// eslu/pipeline.cpp

// Copyright 2026 The eslu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "eslu/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eslu/archive.hpp"
#include "eslu/augment.hpp"
#include "eslu/error.hpp"
#include "eslu/rng.hpp"

namespace eslu {

namespace fs = std::filesystem;

namespace {

void write_table(const fs::path& path, const std::map<std::string, std::string>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : rows) out << k << ' ' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Waveform load_noise(const AugmentConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (!cfg.noise_wav.empty()) return read_wav(cfg.noise_wav);
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (auto& v : w.samples) v = 0.1 * rng.normal();
  return w;
}

Waveform augment(const Waveform& w, AugmentMode mode, const AugmentConfig& cfg,
                 const RoomImpulseResponse* rir_file, std::uint64_t seed) {
  Rng rng(seed);
  Waveform out = w;
  if (mode == AugmentMode::kReverb || mode == AugmentMode::kBoth) {
    const double rt60 = rng.uniform(cfg.rt60_s.lo, cfg.rt60_s.hi);
    const RoomImpulseResponse rir =
        rir_file ? *rir_file : synthetic_rir(rt60, derive_seed(seed, "rir"));
    out = reverberate(out, rir);
  }
  if (mode == AugmentMode::kNoise || mode == AugmentMode::kBoth) {
    const double snr = rng.uniform(cfg.noise_snr_db.lo, cfg.noise_snr_db.hi);
    const Waveform noise = load_noise(cfg, out.size(), derive_seed(seed, "noise"));
    out = add_noise_at_snr(out, noise, snr, derive_seed(seed, "noise-offset"));
  }
  return out;
}

}  // namespace

std::string to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::kNone: return "none";
    case AugmentMode::kNoise: return "noise";
    case AugmentMode::kReverb: return "reverb";
    case AugmentMode::kBoth: return "both";
  }
  return "none";
}

AugmentMode augment_mode_from_string(const std::string& s) {
  if (s == "none") return AugmentMode::kNone;
  if (s == "noise") return AugmentMode::kNoise;
  if (s == "reverb") return AugmentMode::kReverb;
  if (s == "both") return AugmentMode::kBoth;
  throw ConfigError("unknown augmentation '" + s + "' (expected none, noise, reverb or both)");
}

PrepareSummary prepare_features(const fs::path& data_dir, const fs::path& out_dir,
                                const PrepareOptions& opt) {
  opt.fbank.validate();
  opt.plan.validate();
  const Manifest manifest = parse_manifest_dir(data_dir);
  const ShardAssignment assignment = shard_dataset(manifest, opt.plan);

  std::optional<RoomImpulseResponse> rir_file;
  if (!opt.augment.rir_wav.empty() && opt.augment_mode != AugmentMode::kNone) {
    const Waveform r = read_wav(opt.augment.rir_wav);
    rir_file = RoomImpulseResponse{r.samples, r.sample_rate};
    validate_rir(*rir_file);
  }

  const fs::path root = fs::absolute(out_dir).lexically_normal();
  std::error_code ec;
  fs::create_directories(root / "ark", ec);
  if (ec) throw IoError("cannot create " + (root / "ark").string() + ": " + ec.message());

  // (label, shard) -> features in manifest order.
  std::map<std::pair<int, int>, std::vector<NamedFeatures>> groups;
  FbankComputer computer(opt.fbank);
  std::map<std::string, std::string> labels, utt2spk;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const UtteranceRecord& rec = manifest.records[i];
    const ShardSlot& slot = assignment.slots.at(rec.utt_id);
    Waveform w = read_wav(rec.wav_path);
    if (slot.train && opt.augment_mode != AugmentMode::kNone) {
      w = augment(w, opt.augment_mode, opt.augment, rir_file ? &*rir_file : nullptr,
                  derive_seed(opt.seed, "augment:" + rec.utt_id));
    }
    groups[{slot.label, slot.shard}].emplace_back(rec.utt_id, computer.compute(w));
    labels[rec.utt_id] = std::to_string(rec.label);
    utt2spk[rec.utt_id] = rec.speaker_id;
  }

  std::map<std::string, ArchiveIndexEntry> index;
  PrepareSummary summary;
  for (int label = 0; label < 2; ++label) {
    for (int shard = 0; shard < opt.plan.shards_per_class; ++shard) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "%s_%02d", label == 1 ? "pos" : "neg", shard);
      const auto& feats = groups[{label, shard}];
      const auto entries = write_feature_archive(feats, root / "ark" / (std::string(stem) + ".fark"),
                                                 root / "ark" / (std::string(stem) + ".scp"));
      for (const auto& e : entries) index[e.utt_id] = e;
      ++summary.archives;
    }
  }

  auto split_entries = [&](const std::vector<std::string>& ids) {
    std::vector<ArchiveIndexEntry> out;
    for (const auto& id : ids) out.push_back(index.at(id));
    return out;
  };
  const auto train = split_entries(assignment.train);
  const auto test = split_entries(assignment.test);
  write_scp(root / "train.scp", train);
  write_scp(root / "test.scp", test);
  write_table(root / "labels", labels);
  write_table(root / "utt2spk", utt2spk);
  if (fs::exists(data_dir / "events.gt")) {
    fs::copy_file(data_dir / "events.gt", root / "events.gt", fs::copy_options::overwrite_existing,
                  ec);
    if (ec) throw IoError("cannot copy events.gt: " + ec.message());
  }

  nlohmann::json info = {{"data", fs::absolute(data_dir).lexically_normal().string()},
                         {"fbank", to_json(opt.fbank)},
                         {"shards", to_json(opt.plan)},
                         {"augment_mode", to_string(opt.augment_mode)},
                         {"augment", to_json(opt.augment)},
                         {"seed", opt.seed}};
  std::ofstream js(root / "prepare.json", std::ios::trunc);
  js << info.dump(2) << '\n';
  if (!js) throw IoError("write failed: prepare.json");

  summary.train_utts = train.size();
  summary.test_utts = test.size();
  return summary;
}

std::vector<TrainingExample> load_split(const fs::path& features_dir, const std::string& split) {
  const auto entries = read_scp(features_dir / (split + ".scp"));
  const auto labels = read_kaldi_table(features_dir / "labels");
  std::vector<TrainingExample> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    auto it = labels.find(e.utt_id);
    if (it == labels.end()) throw ValidationError("no label for utterance " + e.utt_id);
    if (it->second != "0" && it->second != "1") {
      throw ValidationError("label of " + e.utt_id + " must be 0 or 1");
    }
    out.push_back({e.utt_id, read_feature(e), it->second == "1" ? 1 : 0});
  }
  return out;
}

std::map<std::string, std::optional<double>> read_event_onsets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::optional<double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string utt, onset;
    if (!(ss >> utt)) continue;
    if (!(ss >> onset)) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": missing onset");
    }
    if (onset == "none") {
      out[utt] = std::nullopt;
    } else {
      try {
        out[utt] = std::stod(onset);
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad onset");
      }
    }
  }
  return out;
}

}  // namespace eslu
