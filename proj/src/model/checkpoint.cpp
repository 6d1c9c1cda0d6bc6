/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cropid/model/checkpoint.hpp"

#include <cmath>
#include <limits>

#include "cropid/core/error.hpp"
#include "cropid/datagen/io.hpp"

namespace cropid::model {

using nlohmann::json;

Checkpoint make_checkpoint(const Model& model, std::string kind, int step, double score, rsd::NormStats stats) {
  return Checkpoint{std::move(kind), model.config(), model.layout(), step, score, std::move(stats), model.params()};
}

std::size_t load_matching(ad::ParameterSet& into, const ad::ParameterSet& from) {
  std::size_t copied = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!into.contains(from.name(i))) continue;
    auto& dst = into.value(into.index_of(from.name(i)));
    const auto& src = from.value(i);
    if (dst.rows() != src.rows() || dst.cols() != src.cols()) continue;
    dst = src;
    ++copied;
  }
  return copied;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model model(ckpt.config, ckpt.layout);
  auto& params = model.params();
  if (params.size() != ckpt.params.size()) {
    throw Error(ErrorCode::ConfigError, "checkpoint has " + std::to_string(ckpt.params.size()) +
                                            " parameters, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& src = ckpt.params.value(i);
    auto& dst = params.value(i);
    if (params.name(i) != ckpt.params.name(i) || dst.rows() != src.rows() || dst.cols() != src.cols()) {
      throw Error(ErrorCode::ConfigError, "checkpoint parameter '" + ckpt.params.name(i) + "' does not match");
    }
    dst = src;
  }
  return model;
}

json to_json(const Checkpoint& ckpt) {
  json layout = json::array();
  for (const auto& s : ckpt.layout.satellites) {
    layout.push_back({{"id", s.id}, {"bands", s.bands}, {"cloud_score", s.has_cloud_score}});
  }
  json params = json::array();
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& m = ckpt.params.value(i);
    params.push_back({{"name", ckpt.params.name(i)},
                      {"rows", m.rows()},
                      {"cols", m.cols()},
                      {"values", std::vector<double>(m.data(), m.data() + m.size())}});
  }
  json cfg = json::object();
  for (const auto& [k, v] : to_key_values(ckpt.config)) cfg[k] = v;
  return json{{"format", "cropid-checkpoint"},
              {"version", kCheckpointVersion},
              {"kind", ckpt.kind},
              {"config", cfg},
              {"layout", layout},
              {"step", ckpt.step},
              {"selection_score", std::isnan(ckpt.selection_score) ? json(nullptr) : json(ckpt.selection_score)},
              {"norm_stats", io::to_json(ckpt.norm_stats)},
              {"parameters", params}};
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.at("format") != "cropid-checkpoint" || doc.at("version") != kCheckpointVersion) {
      throw Error(ErrorCode::ParseError, "not a version " + std::to_string(kCheckpointVersion) + " checkpoint");
    }
    Checkpoint ckpt;
    ckpt.kind = doc.at("kind").get<std::string>();
    for (const auto& [k, v] : doc.at("config").items()) {
      if (!apply_key_value(ckpt.config, k, v.get<std::string>())) {
        throw Error(ErrorCode::ParseError, "unknown checkpoint config key '" + k + "'");
      }
    }
    for (const auto& s : doc.at("layout")) {
      ckpt.layout.satellites.push_back(
          {s.at("id").get<std::string>(), s.at("bands").get<std::vector<std::string>>(), s.at("cloud_score").get<bool>()});
    }
    ckpt.step = doc.at("step").get<int>();
    const auto& score = doc.at("selection_score");
    ckpt.selection_score = score.is_null() ? std::numeric_limits<double>::quiet_NaN() : score.get<double>();
    ckpt.norm_stats = io::norm_stats_from_json(doc.at("norm_stats"));
    for (const auto& p : doc.at("parameters")) {
      const auto rows = p.at("rows").get<Eigen::Index>();
      const auto cols = p.at("cols").get<Eigen::Index>();
      const auto values = p.at("values").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw Error(ErrorCode::ParseError, "parameter '" + p.at("name").get<std::string>() + "' has the wrong size");
      }
      Mat m(rows, cols);
      std::copy(values.begin(), values.end(), m.data());
      ckpt.params.add(p.at("name").get<std::string>(), std::move(m));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_text(path, to_json(ckpt).dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(io::read_json(path)); }

}  // namespace cropid::model
