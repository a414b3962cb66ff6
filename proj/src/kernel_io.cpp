// Copyright 2026 The ierg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ierg/kernel_io.hpp"

#include <fstream>
#include <string>

#include "ierg/error.hpp"

namespace ierg {
namespace {

using nlohmann::json;

template <typename T>
T Field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw InvalidArgument(std::string("kernel JSON: missing field '") + name +
                          "'");
  }
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("kernel JSON: bad field '") + name +
                          "': " + e.what());
  }
}

}  // namespace

EigenfunctionDesc eigenfunction_from_json(const json& doc) {
  const auto kind = Field<std::string>(doc, "kind");
  if (kind == "piecewise_constant") {
    return EigenfunctionDesc::PiecewiseConstant(
        Field<std::vector<double>>(doc, "breakpoints"),
        Field<std::vector<double>>(doc, "values"));
  }
  if (kind == "polynomial") {
    return EigenfunctionDesc::Polynomial(
        Field<std::vector<double>>(doc, "coefficients"));
  }
  if (kind == "tabulated") {
    auto values = Field<std::vector<double>>(doc, "values");
    if (doc.contains("knots")) {
      return EigenfunctionDesc::Tabulated(
          Field<std::vector<double>>(doc, "knots"), std::move(values));
    }
    return EigenfunctionDesc::Tabulated(std::move(values));
  }
  throw InvalidArgument("kernel JSON: unknown eigenfunction kind '" + kind +
                        "'");
}

json eigenfunction_to_json(const EigenfunctionDesc& r) {
  json out{{"kind", to_string(r.kind())}};
  switch (r.kind()) {
    case EigenfunctionKind::kPiecewiseConstant:
      out["breakpoints"] = r.points();
      out["values"] = r.values();
      break;
    case EigenfunctionKind::kPolynomial:
      out["coefficients"] = r.values();
      break;
    case EigenfunctionKind::kTabulated:
      out["knots"] = r.points();
      out["values"] = r.values();
      break;
  }
  return out;
}

KernelSpec kernel_from_json(const json& doc) {
  const auto type = Field<std::string>(doc, "type");
  if (type == "sbm") {
    const auto rows = Field<std::vector<std::vector<double>>>(doc, "p");
    SBMParams params;
    params.p.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw InvalidArgument("kernel JSON: 'p' must be square");
      }
      for (std::size_t j = 0; j < rows.size(); ++j) {
        params.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            rows[i][j];
      }
    }
    params.block_boundaries = Field<std::vector<double>>(doc, "boundaries");
    return kernel_from_sbm(params);
  }
  if (type == "rank_one") {
    if (!doc.contains("r")) {
      throw InvalidArgument("kernel JSON: missing field 'r'");
    }
    return kernel_rank_one(Field<double>(doc, "theta"),
                           eigenfunction_from_json(doc.at("r")));
  }
  if (type == "explicit") {
    auto thetas = Field<std::vector<double>>(doc, "thetas");
    std::vector<EigenfunctionDesc> fns;
    const auto& list = doc.at("eigenfunctions");
    if (!list.is_array()) {
      throw InvalidArgument("kernel JSON: 'eigenfunctions' must be an array");
    }
    for (const auto& item : list) fns.push_back(eigenfunction_from_json(item));
    std::optional<double> sup;
    std::optional<double> lip;
    if (doc.contains("sup_bound")) sup = Field<double>(doc, "sup_bound");
    if (doc.contains("lipschitz_constant")) {
      lip = Field<double>(doc, "lipschitz_constant");
    }
    return KernelSpec(std::move(thetas), std::move(fns), sup, lip);
  }
  throw InvalidArgument("kernel JSON: unknown type '" + type + "'");
}

KernelSpec load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoError("cannot parse kernel file " + path.string() + ": " +
                  e.what());
  }
  return kernel_from_json(doc);
}

json kernel_to_json(const KernelSpec& spec) {
  json fns = json::array();
  for (const auto& r : spec.eigenfunctions()) {
    fns.push_back(eigenfunction_to_json(r));
  }
  json out{{"type", "explicit"},
           {"thetas", spec.thetas()},
           {"eigenfunctions", std::move(fns)},
           {"sup_bound", spec.sup_bound()}};
  if (spec.lipschitz_constant()) {
    out["lipschitz_constant"] = *spec.lipschitz_constant();
  }
  return out;
}

json validation_to_json(const KernelSpec& spec,
                        const ValidationReport& report) {
  json isolated = json::array();
  for (std::size_t i : report.isolated) isolated.push_back(i + 1);
  return json{{"kernel_id", spec.id_hex()},
              {"rank", spec.rank()},
              {"thetas", spec.thetas()},
              {"sup_bound", spec.sup_bound()},
              {"measured_sup_f", report.sup_f},
              {"orthonormality_defect", report.orthonormality_defect},
              {"min_f_grid", report.min_f_grid},
              {"lipschitz_quotient", report.lipschitz_quotient},
              {"krein_rutman_applies", report.krein_rutman_applies},
              {"krein_rutman_ok", report.krein_rutman_ok},
              {"isolated", isolated},
              {"ok", report.ok()}};
}

}  // namespace ierg
