#pragma once

// JSON checkpoint helpers. Matrices are stored row-major with explicit dimensions:
//   {"rows": r, "cols": c, "data": [a00, a01, ..., a(r-1)(c-1)]}

#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "numerics.hpp"

namespace csrl {

using json = nlohmann::json;

inline json mat_to_json(const Mat& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Mat mat_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw std::invalid_argument("matrix json: data length does not match rows*cols");
    Mat m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
    return m;
}

inline json vec_to_json(const Vec& v) { return mat_to_json(v); }

inline Vec vec_from_json(const json& j) {
    Mat m = mat_from_json(j);
    if (m.cols() != 1) throw std::invalid_argument("vector json: expected one column");
    return m.col(0);
}

} // namespace csrl
