#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <string>

#include "dynmap/errors.hpp"
#include "dynmap/furniture.hpp"
#include "dynmap/semantic.hpp"

namespace dynmap::detail {

using nlohmann::json;

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw ParseError(std::string(what) + " must be an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

template <typename Derived>
json vec_to_json(const Eigen::MatrixBase<Derived>& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Detection3D detection_from_json(const json& j, std::int64_t frame_id);
HumanObservation human_obs_from_json(const json& j);

}  // namespace dynmap::detail
