/* Copyright 2026 The vqk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "vqk/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "vqk/features.h"

namespace vqk {
namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

const json& Field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ManifestError(where + ": missing field '" + key + "'");
  }
  return *it;
}

}  // namespace

int Dataset::ClassIndex(const std::string& name) const {
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) throw ManifestError("unknown class '" + name + "'");
  return static_cast<int>(it - classes.begin());
}

std::vector<GroundTruthSegment> Dataset::AllSegments() const {
  std::vector<GroundTruthSegment> out;
  for (const VideoRecord& v : videos)
    out.insert(out.end(), v.segments.begin(), v.segments.end());
  return out;
}

Dataset LoadManifest(const std::filesystem::path& path, bool load_features) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  const std::string where = path.string();
  const std::filesystem::path root = path.parent_path();

  Dataset ds;
  try {
    const int version = Field(doc, "version", where).get<int>();
    if (version != kManifestVersion) {
      throw ManifestError(where + ": unsupported manifest version " +
                          std::to_string(version));
    }
    ds.classes = Field(doc, "classes", where).get<std::vector<std::string>>();
    if (ds.classes.empty()) throw ManifestError(where + ": empty class list");
    if (std::set<std::string>(ds.classes.begin(), ds.classes.end()).size() !=
        ds.classes.size()) {
      throw ManifestError(where + ": duplicate class names");
    }

    std::set<std::string> ids;
    for (const json& v : Field(doc, "videos", where)) {
      VideoRecord rec;
      rec.id = Field(v, "id", where).get<std::string>();
      const std::string vw = where + ": video '" + rec.id + "'";
      if (!ids.insert(rec.id).second) throw ManifestError(vw + " is duplicated");
      rec.feature_path = Field(v, "features", vw).get<std::string>();
      rec.fps = Field(v, "fps", vw).get<double>();
      if (!(rec.fps > 0)) throw ManifestError(vw + ": fps must be positive");

      std::vector<int> classes;
      for (const auto& name : Field(v, "labels", vw).get<std::vector<std::string>>()) {
        classes.push_back(ds.ClassIndex(name));
      }
      rec.label = LabelVector(ds.num_classes(), classes);

      if (auto it = v.find("segments"); it != v.end()) {
        for (const json& s : *it) {
          GroundTruthSegment seg;
          seg.video = rec.id;
          seg.class_id = ds.ClassIndex(Field(s, "label", vw).get<std::string>());
          seg.t_start = Field(s, "t_start", vw).get<double>();
          seg.t_end = Field(s, "t_end", vw).get<double>();
          if (!(seg.t_start < seg.t_end) || seg.t_start < 0) {
            throw ManifestError(vw + ": invalid segment [" +
                                std::to_string(seg.t_start) + ", " +
                                std::to_string(seg.t_end) + "]");
          }
          if (!rec.label.Contains(seg.class_id)) {
            throw ManifestError(vw + ": segment class '" +
                                ds.classes[seg.class_id] + "' not in labels");
          }
          rec.segments.push_back(seg);
        }
      }

      const std::filesystem::path feature_file = root / rec.feature_path;
      if (!std::filesystem::exists(feature_file)) {
        throw ManifestError(vw + ": feature file not found: " + feature_file.string());
      }
      ds.videos.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw ManifestError(where + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw ManifestError(where + ": " + e.what());
  }

  if (load_features) {
    for (VideoRecord& rec : ds.videos) {
      rec.features = ReadFeatures(root / rec.feature_path);
      if (rec.features.dim(0) == 0) {
        throw ManifestError(where + ": video '" + rec.id + "' has no segments");
      }
      if (rec.features.dim(1) != ds.videos.front().features.dim(1)) {
        throw ManifestError(where + ": video '" + rec.id +
                            "' feature width differs from the first video");
      }
    }
  }
  return ds;
}

void SaveManifest(const Dataset& dataset, const std::filesystem::path& path) {
  json videos = json::array();
  for (const VideoRecord& v : dataset.videos) {
    json labels = json::array();
    for (int c : v.label.classes()) labels.push_back(dataset.classes.at(c));
    json entry = {{"id", v.id}, {"features", v.feature_path}, {"fps", v.fps},
                  {"labels", labels}};
    if (!v.segments.empty()) {
      json segs = json::array();
      for (const GroundTruthSegment& s : v.segments) {
        segs.push_back({{"label", dataset.classes.at(s.class_id)},
                        {"t_start", s.t_start},
                        {"t_end", s.t_end}});
      }
      entry["segments"] = segs;
    }
    videos.push_back(entry);
  }
  const json doc = {{"version", kManifestVersion},
                    {"classes", dataset.classes},
                    {"videos", videos}};
  std::ofstream file(path);
  if (!file) throw IoError("cannot write manifest " + path.string());
  file << doc.dump(2) << "\n";
}

}  // namespace vqk
