#include "msmax/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace msmax {

std::string to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::evidence:
      return "evidence";
  }
  return "evidence";
}

Finding& VerificationReport::add(std::string name, Status status, std::string detail) {
  findings.push_back(Finding{std::move(name), status, std::move(detail)});
  return findings.back();
}

Finding& VerificationReport::expect(std::string name, bool ok, std::string detail) {
  return add(std::move(name), ok ? Status::pass : Status::fail, std::move(detail));
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
  for (Finding f : other.findings) {
    f.name = prefix + f.name;
    findings.push_back(std::move(f));
  }
  for (ConstantEntry c : other.constants) {
    c.name = prefix + c.name;
    constants.push_back(std::move(c));
  }
}

bool VerificationReport::passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.status == Status::fail;
  return n;
}

namespace {

// JSON has no infinities; keep them readable instead of null.
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string csv_field(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

nlohmann::ordered_json VerificationReport::to_json(bool with_runtime) const {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["seed"] = seed;
  j["passed"] = passed();
  j["scenario"] = scenario;
  auto& fs = j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : findings) {
    nlohmann::ordered_json e;
    e["name"] = f.name;
    e["status"] = to_string(f.status);
    if (!f.detail.empty()) e["detail"] = f.detail;
    if (!f.data.empty()) e["data"] = f.data;
    fs.push_back(std::move(e));
  }
  auto& cs = j["constants"] = nlohmann::ordered_json::array();
  for (const auto& c : constants) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["value"] = number(c.value);
    e["family"] = c.family;
    e["level"] = c.level;
    e["witness"] = c.witness;
    cs.push_back(std::move(e));
  }
  if (with_runtime) j["runtime_seconds"] = runtime_seconds;
  return j;
}

std::string VerificationReport::constants_csv() const {
  std::ostringstream out;
  out << "name,value,family,level,witness\n";
  char buf[64];
  for (const auto& c : constants) {
    std::snprintf(buf, sizeof buf, "%.17g", c.value);
    out << csv_field(c.name) << ',' << buf << ',' << csv_field(c.family) << ',' << c.level << ','
        << csv_field(c.witness) << '\n';
  }
  return out.str();
}

}  // namespace msmax
