#pragma once

#include <array>
#include <string_view>

// Vocabulary the synthetic database is composed from. Titles are built as
// stem + site so that many entries share a multi-word prefix.
namespace ehrqa::words {

inline constexpr std::array<std::string_view, 40> kFirstNames = {
    "cynthia", "james",   "mary",    "robert",  "patricia", "john",
    "jennifer", "michael", "linda",  "david",   "elizabeth", "william",
    "barbara", "richard", "susan",   "joseph",  "jessica",  "thomas",
    "sarah",   "charles", "karen",   "daniel",  "nancy",    "matthew",
    "lisa",    "anthony", "betty",   "mark",    "margaret", "donald",
    "sandra",  "steven",  "ashley",  "paul",    "kimberly", "andrew",
    "emily",   "joshua",  "donna",   "kenneth"};

inline constexpr std::array<std::string_view, 40> kLastNames = {
    "gomez",    "smith",    "johnson",  "williams", "brown",    "jones",
    "garcia",   "miller",   "davis",    "rodriguez", "martinez", "hernandez",
    "lopez",    "gonzalez", "wilson",   "anderson", "thomas",   "taylor",
    "moore",    "jackson",  "martin",   "lee",      "perez",    "thompson",
    "white",    "harris",   "sanchez",  "clark",    "ramirez",  "lewis",
    "robinson", "walker",   "young",    "allen",    "king",     "wright",
    "scott",    "torres",   "nguyen",   "hill"};

inline constexpr std::array<std::string_view, 40> kDrugs = {
    "ferrous gluconate",   "ferrous sulfate",      "acetylcysteine",
    "heparin sodium",      "heparin flush",        "insulin glargine",
    "insulin lispro",      "metoprolol tartrate",  "metoprolol succinate",
    "furosemide",          "potassium chloride",   "sodium chloride",
    "magnesium sulfate",   "docusate sodium",      "senna",
    "acetaminophen",       "aspirin",              "atorvastatin",
    "lisinopril",          "pantoprazole",         "ondansetron",
    "morphine sulfate",    "vancomycin",           "piperacillin",
    "warfarin",            "amiodarone",           "famotidine",
    "lorazepam",           "haloperidol",          "simvastatin",
    "levothyroxine sodium", "calcium gluconate",   "dextrose",
    "albuterol",           "prednisone",           "hydralazine",
    "labetalol",           "clopidogrel",          "enoxaparin sodium",
    "gabapentin"};

struct TitlePart {
  std::string_view full;
  std::string_view abbreviated;
};

inline constexpr std::array<TitlePart, 10> kDiagnosisStems = {{
    {"malignant neoplasm of", "mal neo"},
    {"benign neoplasm of", "benign neo"},
    {"other diseases of", "oth dis"},
    {"acute infection of", "ac infect"},
    {"chronic inflammation of", "chr inflam"},
    {"open wound of", "open wnd"},
    {"congenital anomaly of", "cong anom"},
    {"injury of", "injury"},
    {"secondary malignant neoplasm of", "sec mal neo"},
    {"unspecified disorder of", "unsp dis"},
}};

inline constexpr std::array<TitlePart, 12> kDiagnosisSites = {{
    {"heart", "heart"},
    {"lung", "lung"},
    {"kidney", "kidney"},
    {"liver", "liver"},
    {"stomach", "stomach"},
    {"colon", "colon"},
    {"pancreas", "pancreas"},
    {"bladder", "bladder"},
    {"brain", "brain"},
    {"skin", "skin"},
    {"bone and cartilage", "bone cart"},
    {"lymph nodes", "lymph nd"},
}};

inline constexpr std::array<TitlePart, 8> kProcedureStems = {{
    {"other operations on", "oth ops"},
    {"diagnostic procedures on", "dx proc"},
    {"incision of", "incis"},
    {"excision of lesion of", "exc les"},
    {"repair of", "repair"},
    {"closed biopsy of", "clos bx"},
    {"insertion of stent into", "ins stent"},
    {"other conversion of", "oth conv"},
}};

inline constexpr std::array<TitlePart, 12> kProcedureSites = {{
    {"heart and pericardium", "heart peric"},
    {"skin and subcutaneous tissue", "skin subq"},
    {"vessels of head and neck", "head neck vess"},
    {"large intestine", "lg intest"},
    {"small intestine", "sm intest"},
    {"kidney", "kidney"},
    {"bladder", "bladder"},
    {"stomach", "stomach"},
    {"bronchus", "bronchus"},
    {"spinal cord", "spinal cord"},
    {"thyroid gland", "thyroid"},
    {"liver", "liver"},
}};

struct LabItem {
  std::string_view label;
  std::string_view fluid;
  std::string_view category;
};

inline constexpr std::array<LabItem, 12> kLabItems = {{
    {"white blood cells", "blood", "hematology"},
    {"hemoglobin", "blood", "hematology"},
    {"platelet count", "blood", "hematology"},
    {"creatinine", "blood", "chemistry"},
    {"glucose", "blood", "chemistry"},
    {"potassium", "blood", "chemistry"},
    {"sodium", "blood", "chemistry"},
    {"lactate", "blood", "blood gas"},
    {"bilirubin total", "blood", "chemistry"},
    {"albumin", "urine", "chemistry"},
    {"troponin t", "blood", "chemistry"},
    {"urea nitrogen", "blood", "chemistry"},
}};

inline constexpr std::array<std::string_view, 4> kAdmissionTypes = {
    "emergency", "elective", "urgent", "newborn"};
inline constexpr std::array<std::string_view, 5> kInsurance = {
    "medicare", "medicaid", "private", "government", "self pay"};
inline constexpr std::array<std::string_view, 8> kLanguages = {
    "english", "spanish", "portuguese", "russian",
    "cantonese", "vietnamese", "haitian", "polish"};
inline constexpr std::array<std::string_view, 5> kMaritalStatus = {
    "married", "single", "widowed", "divorced", "separated"};
inline constexpr std::array<std::string_view, 5> kEthnicity = {
    "white", "black african american", "hispanic or latino", "asian",
    "unknown"};
inline constexpr std::array<std::string_view, 3> kDrugTypes = {"main", "additive",
                                                               "base"};
inline constexpr std::array<std::string_view, 5> kRoutes = {"po", "iv", "sc", "im",
                                                            "ng"};
inline constexpr std::array<std::string_view, 3> kLabFlags = {"normal", "abnormal",
                                                              "delta"};

}  // namespace ehrqa::words
