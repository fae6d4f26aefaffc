#include "tabsynth/demo.hpp"

#include <cmath>

#include "tabsynth/rng.hpp"

namespace tabsynth {

namespace {

// Column value orders. Education is ordinal lowest to highest; everything
// else is alphabetical, matching what schema inference would produce.
const std::vector<std::string> kWorkclass = {"Federal-gov", "Local-gov", "Private", "Self-emp",
                                             "State-gov"};
const std::vector<std::string> kEducation = {"HS-grad", "Some-college", "Assoc",
                                             "Bachelors", "Masters", "Doctorate"};
const std::vector<std::string> kMarital = {"Divorced", "Married", "Never-married", "Widowed"};
const std::vector<std::string> kOccupation = {"Admin-clerical", "Craft-repair", "Exec-managerial",
                                              "Prof-specialty", "Sales", "Service", "Tech-support"};
const std::vector<std::string> kRelationship = {"Husband", "Not-in-family", "Own-child",
                                                "Unmarried", "Wife"};
const std::vector<std::string> kEthnicity = {"Group-A", "Group-B", "Group-C", "Group-D"};
const std::vector<std::string> kGender = {"Female", "Male"};

enum { kFemale = 0, kMale = 1 };
enum { kDivorced = 0, kMarried = 1, kNever = 2, kWidowed = 3 };
enum { kHusband = 0, kNotInFamily = 1, kOwnChild = 2, kUnmarried = 3, kWife = 4 };
enum { kExec = 2, kProf = 3 };
enum { kSelfEmp = 3 };

std::int32_t draw(const double* probs, int n, Rng& rng) {
  double u = rng.uniform();
  double cum = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  return n - 1;
}

}  // namespace

Schema census_demo_schema() {
  Schema s;
  s.columns = {
      {"workclass", ColumnKind::categorical, kWorkclass},
      {"education", ColumnKind::ordinal, kEducation},
      {"marital_status", ColumnKind::categorical, kMarital},
      {"occupation", ColumnKind::categorical, kOccupation},
      {"relationship", ColumnKind::categorical, kRelationship},
      {"ethnicity", ColumnKind::categorical, kEthnicity},
      {"gender", ColumnKind::categorical, kGender},
  };
  s.label = {"income", "<=50K", ">50K"};
  s.sensitive = SensitiveSpec{"gender", "Female", "Male"};
  s.validate();
  return s;
}

Dataset generate_census_demo(Index rows, std::uint64_t seed) {
  if (rows <= 0) throw DataError("demo generator: rows must be positive");
  Schema schema = census_demo_schema();
  Dataset d;
  d.schema = schema;
  d.rows.resize(rows, schema.attribute_count());
  d.labels.resize(rows);

  Rng rng(derive_seed(seed, "demo"));

  const double p_gender[2] = {0.45, 0.55};
  const double p_education[6] = {0.32, 0.24, 0.12, 0.20, 0.09, 0.03};
  const double p_marital[4] = {0.14, 0.47, 0.33, 0.06};
  const double p_occ_low[7] = {0.16, 0.22, 0.08, 0.05, 0.16, 0.25, 0.08};
  const double p_occ_high[7] = {0.10, 0.05, 0.28, 0.32, 0.12, 0.05, 0.08};
  const double p_workclass[5] = {0.06, 0.13, 0.64, 0.11, 0.06};
  const double p_ethnicity[4] = {0.72, 0.12, 0.10, 0.06};
  const double p_rel_married_spouse = 0.90;
  const double p_rel_never[5] = {0.0, 0.45, 0.35, 0.20, 0.0};
  const double p_rel_single[5] = {0.0, 0.50, 0.05, 0.45, 0.0};

  for (Index r = 0; r < rows; ++r) {
    std::int32_t gender = draw(p_gender, 2, rng);
    std::int32_t education = draw(p_education, 6, rng);
    std::int32_t marital = draw(p_marital, 4, rng);
    std::int32_t occupation = (education >= 3) ? draw(p_occ_high, 7, rng) : draw(p_occ_low, 7, rng);
    std::int32_t workclass = draw(p_workclass, 5, rng);
    std::int32_t ethnicity = draw(p_ethnicity, 4, rng);

    std::int32_t relationship;
    if (marital == kMarried) {
      bool spouse = rng.uniform() < p_rel_married_spouse;
      relationship = spouse ? (gender == kMale ? kHusband : kWife) : kNotInFamily;
    } else if (marital == kNever) {
      relationship = draw(p_rel_never, 5, rng);
    } else {
      relationship = draw(p_rel_single, 5, rng);
    }

    double score = -2.75 + 0.45 * education + (occupation == kExec || occupation == kProf ? 0.85 : 0.0) +
                   (marital == kMarried ? 1.05 : 0.0) + (gender == kMale ? 0.55 : 0.0) +
                   (workclass == kSelfEmp ? 0.30 : 0.0);
    double p_income = 1.0 / (1.0 + std::exp(-score));

    d.rows(r, 0) = workclass;
    d.rows(r, 1) = education;
    d.rows(r, 2) = marital;
    d.rows(r, 3) = occupation;
    d.rows(r, 4) = relationship;
    d.rows(r, 5) = ethnicity;
    d.rows(r, 6) = gender;
    d.labels[r] = rng.uniform() < p_income ? 1 : 0;
  }
  d.validate();
  return d;
}

}  // namespace tabsynth
