#include "popdyn/scenario_io.hpp"

#include <json.hpp>

#include <random>

#include "popdyn/csv.hpp"
#include "popdyn/random.hpp"

namespace popdyn {
namespace {

using nlohmann::json;

// Cursor into the document that remembers its JSON pointer for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError(path_.empty() ? "/" : path_, msg);
  }

  bool Has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node At(const char* key) const {
    if (!j_.is_object()) Fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) Fail(std::string("missing field '") + key + "'");
    return Node(*it, path_ + "/" + key);
  }

  Node At(size_t k) const {
    if (!j_.is_array() || k >= j_.size()) Fail("index " + std::to_string(k) + " out of range");
    return Node(j_[k], path_ + "/" + std::to_string(k));
  }

  size_t Size() const {
    if (!j_.is_array()) Fail("expected an array");
    return j_.size();
  }

  double Number() const {
    if (!j_.is_number()) Fail("expected a number");
    return j_.get<double>();
  }

  long long Integer() const {
    if (!j_.is_number_integer()) Fail("expected an integer");
    return j_.get<long long>();
  }

  std::uint64_t Unsigned() const {
    if (!j_.is_number_integer() || (j_.is_number_integer() && !j_.is_number_unsigned() &&
                                    j_.get<long long>() < 0)) {
      Fail("expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }

  bool Bool() const {
    if (!j_.is_boolean()) Fail("expected true or false");
    return j_.get<bool>();
  }

  std::string String() const {
    if (!j_.is_string()) Fail("expected a string");
    return j_.get<std::string>();
  }

  Vector Vec() const {
    const size_t n = Size();
    Vector v(static_cast<Eigen::Index>(n));
    for (size_t k = 0; k < n; ++k) v[static_cast<Eigen::Index>(k)] = At(k).Number();
    return v;
  }

  Matrix Mat(int rows, int cols) const {
    if (Size() != static_cast<size_t>(rows)) {
      Fail("expected " + std::to_string(rows) + " rows, got " + std::to_string(Size()));
    }
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      const Node row = At(static_cast<size_t>(i));
      if (row.Size() != static_cast<size_t>(cols)) {
        row.Fail("expected " + std::to_string(cols) + " entries, got " +
                 std::to_string(row.Size()));
      }
      for (int j = 0; j < cols; ++j) m(i, j) = row.At(static_cast<size_t>(j)).Number();
    }
    return m;
  }

  std::vector<int> Indices(int upper) const {
    std::vector<int> out;
    for (size_t k = 0; k < Size(); ++k) {
      const long long v = At(k).Integer();
      if (v < 0 || v >= upper) {
        At(k).Fail("index must be in [0, " + std::to_string(upper) + ")");
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

// Looks up `name` in a string table or fails listing the choices.
template <typename E, size_t N>
E Choice(const Node& node, const std::pair<const char*, E> (&table)[N]) {
  const std::string s = node.String();
  std::string options;
  for (const auto& [name, value] : table) {
    if (s == name) return value;
    options += options.empty() ? name : std::string(", ") + name;
  }
  node.Fail("unknown value '" + s + "' (expected one of: " + options + ")");
}

template <typename E, size_t N>
const char* Name(E value, const std::pair<const char*, E> (&table)[N]) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  throw InvalidArgument("unnamed enumerator");
}

constexpr std::pair<const char*, AllocationKind> kAllocationKinds[] = {
    {"mwud", AllocationKind::kMwud}, {"best_response", AllocationKind::kBestResponse}};
constexpr std::pair<const char*, Comparison> kComparisons[] = {
    {"absolute", Comparison::kAbsolute}, {"relative", Comparison::kRelative}};
constexpr std::pair<const char*, TiePolicy> kTiePolicies[] = {
    {"split_evenly", TiePolicy::kSplitEvenly}, {"keep_previous", TiePolicy::kKeepPrevious}};
constexpr std::pair<const char*, LearnerKind> kLearnerKinds[] = {
    {"full_min", LearnerKind::kFullMin}, {"repeated_gd", LearnerKind::kRepeatedGd}};
constexpr std::pair<const char*, StepForm> kStepForms[] = {
    {"inverse_time", StepForm::kInverseTime}, {"constant", StepForm::kConstant}};
constexpr std::pair<const char*, MinimizeMethod> kMethods[] = {
    {"closed_form", MinimizeMethod::kClosedFormQuadratic}, {"newton", MinimizeMethod::kNewton}};
constexpr std::pair<const char*, ScheduleKind> kSchedules[] = {
    {"all_sequential", ScheduleKind::kAllSequential},
    {"round_robin_subpops", ScheduleKind::kRoundRobinSubpops},
    {"round_robin_learners", ScheduleKind::kRoundRobinLearners},
    {"custom_order", ScheduleKind::kCustomOrder}};

AllocationRule ParseAllocationRule(const Node& node) {
  AllocationRule r;
  if (node.Has("kind")) r.kind = Choice(node.At("kind"), kAllocationKinds);
  if (node.Has("gamma")) r.gamma = node.At("gamma").Number();
  if (node.Has("comparison")) r.comparison = Choice(node.At("comparison"), kComparisons);
  if (node.Has("tie_tolerance")) r.tie_tolerance = node.At("tie_tolerance").Number();
  if (node.Has("tie_policy")) r.tie_policy = Choice(node.At("tie_policy"), kTiePolicies);
  try {
    r.Validate();
  } catch (const InvalidArgument& e) {
    node.Fail(e.what());
  }
  return r;
}

LearnerRule ParseLearnerRule(const Node& node) {
  LearnerRule r;
  if (node.Has("kind")) r.kind = Choice(node.At("kind"), kLearnerKinds);
  if (node.Has("step")) {
    const Node s = node.At("step");
    if (s.Has("form")) r.schedule.form = Choice(s.At("form"), kStepForms);
    if (s.Has("base")) r.schedule.base = s.At("base").Number();
  }
  if (node.Has("inner_steps")) r.inner_steps = static_cast<int>(node.At("inner_steps").Integer());
  if (node.Has("method")) r.method = Choice(node.At("method"), kMethods);
  if (node.Has("tolerance")) r.tolerance = node.At("tolerance").Number();
  if (node.Has("max_iterations")) {
    r.max_iterations = static_cast<int>(node.At("max_iterations").Integer());
  }
  try {
    r.Validate();
  } catch (const InvalidArgument& e) {
    node.Fail(e.what());
  }
  return r;
}

UpdateSchedule ParseSchedule(const Node& node, int n, int m) {
  UpdateSchedule s;
  if (node.Has("kind")) s.kind = Choice(node.At("kind"), kSchedules);
  if (node.Has("subpop_order")) s.subpop_order = node.At("subpop_order").Indices(n);
  if (node.Has("learner_order")) s.learner_order = node.At("learner_order").Indices(m);
  try {
    s.Validate(n, m);
  } catch (const InvalidArgument& e) {
    node.Fail(e.what());
  }
  return s;
}

RiskFunction ParseRisk(const Node& node) {
  const std::string kind = node.Has("kind") ? node.At("kind").String() : "quadratic";
  if (kind != "quadratic") node.At("kind").Fail("only 'quadratic' risks can be read from files");
  const Vector center = node.At("center").Vec();
  const int d = static_cast<int>(center.size());
  if (d == 0) node.At("center").Fail("center must not be empty");
  const double offset = node.Has("offset") ? node.At("offset").Number() : 0.0;
  Matrix curvature = Matrix::Identity(d, d);
  if (node.Has("curvature")) {
    const Node c = node.At("curvature");
    curvature = c.raw().is_number() ? Matrix(c.Number() * Matrix::Identity(d, d)) : c.Mat(d, d);
  }
  try {
    return RiskFunction::Quadratic(center, curvature, offset);
  } catch (const InvalidArgument& e) {
    node.Fail(e.what());
  }
}

Matrix ParseTheta(const Node& learners, int m, const std::vector<RiskFunction>& risks,
                  std::uint64_t seed) {
  const int d = risks.front().dim();
  if (learners.Has("initial_theta")) return learners.At("initial_theta").Mat(m, d);
  if (!learners.Has("init")) {
    Matrix th(m, d);
    for (int j = 0; j < m; ++j) th.row(j) = risks[j].center().transpose();
    return th;
  }
  const Node init = learners.At("init");
  const std::string kind = init.At("kind").String();
  if (kind == "explicit") return init.At("theta").Mat(m, d);
  if (kind == "centers_subset") {
    std::vector<int> idx(m);
    for (int j = 0; j < m; ++j) idx[j] = j;
    if (init.Has("indices")) {
      idx = init.At("indices").Indices(static_cast<int>(risks.size()));
      if (static_cast<int>(idx.size()) != m) init.At("indices").Fail("need exactly m indices");
    }
    Matrix th(m, d);
    for (int j = 0; j < m; ++j) th.row(j) = risks[idx[j]].center().transpose();
    return th;
  }
  if (kind == "random_gaussian") {
    const double sigma = init.Has("sigma") ? init.At("sigma").Number() : 1.0;
    if (!(sigma >= 0.0)) init.At("sigma").Fail("sigma must be >= 0");
    Rng rng(init.Has("seed") ? init.At("seed").Unsigned() : derive_seed(seed, Stream::kInit, 0));
    std::normal_distribution<double> g(0.0, sigma);
    Vector mean = Vector::Zero(d);
    for (const auto& r : risks) mean += r.center();
    mean /= static_cast<double>(risks.size());
    Matrix th(m, d);
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < d; ++k) th(j, k) = mean[k] + g(rng);
    }
    return th;
  }
  init.At("kind").Fail("unknown init '" + kind +
                       "' (expected explicit, centers_subset or random_gaussian)");
}

Matrix ParseAlpha(const Node& root, int n, int m, std::uint64_t seed) {
  if (!root.Has("initial_alpha")) return Matrix::Constant(n, m, 1.0 / m);
  const Node a = root.At("initial_alpha");
  const std::string kind = a.raw().is_string() ? a.String() : a.At("kind").String();
  if (kind == "uniform") return Matrix::Constant(n, m, 1.0 / m);
  if (kind == "explicit") {
    const Node mat = a.At("matrix");
    const Matrix out = mat.Mat(n, m);
    for (int i = 0; i < n; ++i) {
      const Node row = mat.At(static_cast<size_t>(i));
      if (out.row(i).minCoeff() < 0.0) {
        row.Fail("allocation row " + std::to_string(i) + " has a negative entry");
      }
      const double sum = out.row(i).sum();
      if (std::abs(sum - 1.0) > kSimplexTolerance) {
        row.Fail("allocation row " + std::to_string(i) + " sums to " + format_double(sum) +
                 ", expected 1");
      }
    }
    return out;
  }
  if (kind == "assignment") {
    const std::vector<int> map = a.At("map").Indices(m);
    if (static_cast<int>(map.size()) != n) a.At("map").Fail("need exactly n entries");
    return AllocationMatrix::FromAssignment(map, m).matrix();
  }
  if (kind == "random_dirichlet") {
    Rng rng(a.Has("seed") ? a.At("seed").Unsigned() : derive_seed(seed, Stream::kInit, 1));
    std::gamma_distribution<double> g(1.0, 1.0);
    Matrix out(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) out(i, j) = g(rng) + 1e-12;
      out.row(i) /= out.row(i).sum();
    }
    return out;
  }
  a.Fail("unknown initial_alpha '" + kind +
         "' (expected uniform, explicit, assignment or random_dirichlet)");
}

ScenarioFile ParseRoot(const Node& root) {
  const long long version = root.At("schema_version").Integer();
  if (version != kScenarioSchemaVersion) {
    root.At("schema_version").Fail("unsupported schema_version " + std::to_string(version));
  }
  const std::uint64_t seed = root.Has("seed") ? root.At("seed").Unsigned() : 0;

  const Node pop = root.At("population");
  Vector beta = pop.At("betas").Vec();
  const int n = static_cast<int>(beta.size());
  if (n == 0) pop.At("betas").Fail("need at least one subpopulation");
  for (int i = 0; i < n; ++i) {
    if (!(beta[i] > 0.0)) pop.At("betas").At(i).Fail("betas must be > 0");
  }
  const bool normalize = pop.Has("normalize") && pop.At("normalize").Bool();
  if (normalize) {
    beta /= beta.sum();
  } else if (std::abs(beta.sum() - 1.0) > 1e-12) {
    pop.At("betas").Fail("betas sum to " + format_double(beta.sum()) +
                         "; set normalize=true to rescale");
  }

  const Node rnode = pop.At("risks");
  if (rnode.Size() != static_cast<size_t>(n)) {
    rnode.Fail("expected " + std::to_string(n) + " risks (one per beta), got " +
               std::to_string(rnode.Size()));
  }
  std::vector<RiskFunction> risks;
  for (int i = 0; i < n; ++i) {
    const Node r = rnode.At(static_cast<size_t>(i));
    risks.push_back(ParseRisk(r));
    if (risks.back().dim() != risks.front().dim()) {
      r.At("center").Fail("dimension " + std::to_string(risks.back().dim()) +
                          " differs from " + std::to_string(risks.front().dim()));
    }
  }

  const Node learners = root.At("learners");
  const long long m = learners.At("m").Integer();
  if (m < 1 || m > n) learners.At("m").Fail("m must be in [1, n]");

  const AllocationRule arule =
      root.Has("subpop_rule") ? ParseAllocationRule(root.At("subpop_rule")) : AllocationRule{};
  const LearnerRule lrule =
      root.Has("learner_rule") ? ParseLearnerRule(root.At("learner_rule")) : LearnerRule{};
  const UpdateSchedule sched = root.Has("schedule")
                                   ? ParseSchedule(root.At("schedule"), n, static_cast<int>(m))
                                   : UpdateSchedule{};

  EquilibriumDetector det;
  if (root.Has("detector")) {
    const Node dn = root.At("detector");
    if (dn.Has("tolerance")) det.state_tolerance = dn.At("tolerance").Number();
    if (dn.Has("window")) det.window = static_cast<int>(dn.At("window").Integer());
    try {
      det.Validate();
    } catch (const InvalidArgument& e) {
      dn.Fail(e.what());
    }
  }

  const Matrix theta = ParseTheta(learners, static_cast<int>(m), risks, seed);
  const Matrix alpha = ParseAlpha(root, n, static_cast<int>(m), seed);

  int max_steps = 10000;
  if (root.Has("max_steps")) {
    const long long v = root.At("max_steps").Integer();
    if (v < 1) root.At("max_steps").Fail("max_steps must be >= 1");
    max_steps = static_cast<int>(v);
  }
  double sigma = 0.0;
  if (root.Has("perturbation")) {
    sigma = root.At("perturbation").At("sigma").Number();
    if (!(sigma >= 0.0)) root.At("perturbation").At("sigma").Fail("sigma must be >= 0");
  }

  Scenario scenario(beta, std::move(risks), static_cast<int>(m), arule, lrule, sched);
  return ScenarioFile{root.Has("name") ? root.At("name").String() : std::string(),
                      std::move(scenario),
                      SystemState{AllocationMatrix(alpha), theta, 0},
                      det,
                      seed,
                      max_steps,
                      sigma};
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

json Parse(std::string_view text, const std::string& source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col),
                     "syntax error");
  }
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text, const std::string& source) {
  const json doc = Parse(text, source);
  try {
    return ParseRoot(Node(doc, ""));
  } catch (const ParseError& e) {
    throw ParseError(source + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  } catch (const InvalidArgument& e) {
    throw ParseError(source, e.what());
  } catch (const InvalidState& e) {
    throw ParseError(source, e.what());
  }
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.string());
}

std::string serialize_scenario(const ScenarioFile& file) {
  const Scenario& s = file.scenario;
  json risks = json::array();
  for (const RiskFunction& r : s.risks()) {
    if (r.kind() != RiskKind::kQuadratic) {
      throw InvalidArgument("only quadratic risks can be serialized");
    }
    risks.push_back({{"kind", "quadratic"},
                     {"center", VectorJson(r.center())},
                     {"curvature", MatrixJson(r.curvature())},
                     {"offset", r.offset()}});
  }
  const AllocationRule& ar = s.subpop_rule();
  const LearnerRule& lr = s.learner_rule();
  const UpdateSchedule& sc = s.schedule();
  json doc = {
      {"schema_version", kScenarioSchemaVersion},
      {"name", file.name},
      {"seed", file.seed},
      {"max_steps", file.max_steps},
      {"population",
       {{"normalize", false}, {"betas", VectorJson(s.beta())}, {"risks", std::move(risks)}}},
      {"learners",
       {{"m", s.m()}, {"init", {{"kind", "explicit"}, {"theta", MatrixJson(file.initial_state.theta)}}}}},
      {"initial_alpha",
       {{"kind", "explicit"}, {"matrix", MatrixJson(file.initial_state.alpha.matrix())}}},
      {"subpop_rule",
       {{"kind", Name(ar.kind, kAllocationKinds)},
        {"gamma", ar.gamma},
        {"comparison", Name(ar.comparison, kComparisons)},
        {"tie_tolerance", ar.tie_tolerance},
        {"tie_policy", Name(ar.tie_policy, kTiePolicies)}}},
      {"learner_rule",
       {{"kind", Name(lr.kind, kLearnerKinds)},
        {"step", {{"form", Name(lr.schedule.form, kStepForms)}, {"base", lr.schedule.base}}},
        {"inner_steps", lr.inner_steps},
        {"method", Name(lr.method, kMethods)},
        {"tolerance", lr.tolerance},
        {"max_iterations", lr.max_iterations}}},
      {"schedule",
       {{"kind", Name(sc.kind, kSchedules)},
        {"subpop_order", sc.subpop_order},
        {"learner_order", sc.learner_order}}},
      {"detector",
       {{"tolerance", file.detector.state_tolerance}, {"window", file.detector.window}}},
      {"perturbation", {{"sigma", file.sigma}}},
  };
  return doc.dump(2) + "\n";
}

std::string serialize_state(const SystemState& state) {
  const json doc = {{"t", state.t},
                    {"alpha", MatrixJson(state.alpha.matrix())},
                    {"theta", MatrixJson(state.theta)}};
  return doc.dump(2) + "\n";
}

SystemState parse_state(std::string_view text, const Scenario& scenario,
                        const std::string& source) {
  const json doc = Parse(text, source);
  try {
    const Node root(doc, "");
    const Matrix alpha = root.At("alpha").Mat(scenario.n(), scenario.m());
    const Matrix theta = root.At("theta").Mat(scenario.m(), scenario.d());
    const int t = root.Has("t") ? static_cast<int>(root.At("t").Integer()) : 0;
    for (int i = 0; i < scenario.n(); ++i) {
      const double sum = alpha.row(i).sum();
      if (alpha.row(i).minCoeff() < 0.0 || std::abs(sum - 1.0) > kSimplexTolerance) {
        root.At("alpha").At(static_cast<size_t>(i))
            .Fail("allocation row " + std::to_string(i) + " is not on the simplex (sum " +
                  format_double(sum) + ")");
      }
    }
    return SystemState{AllocationMatrix(alpha), theta, t};
  } catch (const ParseError& e) {
    throw ParseError(source + ":" + e.location(), std::string(e.what()).substr(e.location().size() + 2));
  }
}

}  // namespace popdyn
