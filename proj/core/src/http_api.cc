/*
 * Copyright 2026 The LACE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lace/http_api.h"

#include <optional>
#include <vector>

#include <httplib.h>

#include "lace/error.h"

namespace lace {

using nlohmann::json;

namespace {

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::optional<std::string> QueryParam(const ApiRequest& r, const std::string& key) {
  auto it = r.query.find(key);
  if (it == r.query.end()) return std::nullopt;
  return it->second;
}

json ParseBody(const ApiRequest& r) {
  if (r.body.empty()) return json::object();
  json j;
  try {
    j = json::parse(r.body);
  } catch (const json::parse_error& ex) {
    throw Error(ErrorCode::kInvalidInput, "request body is not valid JSON", ex.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "request body must be an object");
  return j;
}

std::optional<std::uint64_t> ExpectedRevision(const json& body) {
  if (!body.contains("expected_revision") || body.at("expected_revision").is_null()) {
    return std::nullopt;
  }
  if (!body.at("expected_revision").is_number_unsigned()) {
    throw Error(ErrorCode::kInvalidInput, "expected_revision must be a nonnegative integer");
  }
  return body.at("expected_revision").get<std::uint64_t>();
}

std::vector<std::string> IdArray(const json& body, const char* key) {
  if (!body.contains(key)) return {};
  if (!body.at(key).is_array()) {
    throw Error(ErrorCode::kInvalidInput, std::string("'") + key + "' must be an array");
  }
  std::vector<std::string> out;
  for (const json& v : body.at(key)) {
    if (!v.is_string()) {
      throw Error(ErrorCode::kInvalidInput, std::string("'") + key + "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t ParseK(const std::string& text) {
  std::size_t pos = 0;
  long long k = 0;
  try {
    k = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || k <= 0) {
    throw Error(ErrorCode::kInvalidInput, "k must be a positive integer", text);
  }
  return static_cast<std::size_t>(k);
}

ApiResponse MethodNotAllowed(const ApiRequest& r) {
  return {405, ErrorBody("method_not_allowed",
                         r.method + " is not supported on " + r.path)};
}

json SavesJson(const UserRecord& rec) {
  return json{{"user_id", rec.library.user_id},
              {"revision", rec.revision},
              {"saved_doc_ids", std::vector<std::string>(rec.saved_doc_ids.begin(),
                                                         rec.saved_doc_ids.end())}};
}

json ProfileResponse(const UserRecord& rec, bool include_values) {
  json j = ProfileToJson(rec.profile, include_values);
  j["revision"] = rec.revision;
  return j;
}

ApiResponse UserRoute(Service& service, const ApiRequest& r, const std::string& id,
                      const std::string& leaf) {
  const std::string& m = r.method;
  if (leaf.empty()) {
    if (m != "GET") return MethodNotAllowed(r);
    return {200, service.GetUser(id).ToJson(false)};
  }
  if (leaf == "profile") {
    if (m != "GET") return MethodNotAllowed(r);
    const bool values = QueryParam(r, "values").value_or("false") == "true";
    return {200, ProfileResponse(service.GetUser(id), values)};
  }
  if (leaf == "edits") {
    if (m != "POST") return MethodNotAllowed(r);
    return {200, ProfileResponse(service.ApplyEdit(id, Edit::FromJson(ParseBody(r))), false)};
  }
  if (leaf == "selections") {
    if (m == "DELETE") {
      Edit e;
      e.kind = Edit::Kind::kClear;
      return {200, ProfileResponse(service.ApplyEdit(id, e), false)};
    }
    if (m != "POST") return MethodNotAllowed(r);
    const json body = ParseBody(r);
    Edit e;
    e.kind = Edit::Kind::kSetSelection;
    e.positive = IdArray(body, "positive");
    e.negative = IdArray(body, "negative");
    e.expected_revision = ExpectedRevision(body);
    return {200, ProfileResponse(service.ApplyEdit(id, e), false)};
  }
  if (leaf == "recommendations") {
    if (m != "GET") return MethodNotAllowed(r);
    std::optional<std::size_t> k;
    if (auto text = QueryParam(r, "k")) k = ParseK(*text);
    const RankMode mode = ParseRankMode(QueryParam(r, "mode").value_or("full"));
    std::optional<std::filesystem::path> first_stage;
    if (auto path = QueryParam(r, "first_stage")) first_stage = *path;
    return {200, service.GetRecommendations(id, k, mode, first_stage)
                     .ToJson(service.index().corpus())};
  }
  if (leaf == "saves") {
    if (m == "GET") return {200, SavesJson(service.GetUser(id))};
    if (m != "POST") return MethodNotAllowed(r);
    const json body = ParseBody(r);
    if (!body.contains("doc_id") || !body.at("doc_id").is_string()) {
      throw Error(ErrorCode::kInvalidInput, "missing string field 'doc_id'");
    }
    if (body.contains("saved") && !body.at("saved").is_boolean()) {
      throw Error(ErrorCode::kInvalidInput, "'saved' must be a boolean");
    }
    return {200, SavesJson(service.SetSaved(id, body.at("doc_id").get<std::string>(),
                                            body.value("saved", true),
                                            ExpectedRevision(body)))};
  }
  return {404, ErrorBody("not_found", "no route for " + r.path)};
}

ApiResponse Route(Service& service, const ApiRequest& r) {
  const std::vector<std::string> parts = SplitPath(r.path);
  if (parts.size() == 1 && parts[0] == "health") {
    if (r.method != "GET") return MethodNotAllowed(r);
    return {200, service.Health()};
  }
  if (parts.size() == 1 && parts[0] == "config") {
    if (r.method != "GET") return MethodNotAllowed(r);
    return {200, service.config().ToJson()};
  }
  if (!parts.empty() && parts[0] == "users") {
    if (parts.size() == 1) {
      if (r.method != "POST") return MethodNotAllowed(r);
      const json body = ParseBody(r);
      if (!body.contains("user_id") || !body.at("user_id").is_string()) {
        throw Error(ErrorCode::kInvalidInput, "missing string field 'user_id'");
      }
      if (!body.contains("doc_ids")) {
        throw Error(ErrorCode::kInvalidInput, "missing field 'doc_ids'");
      }
      const UserRecord rec = service.CreateUser(body.at("user_id").get<std::string>(),
                                                IdArray(body, "doc_ids"));
      return {201, rec.ToJson(false)};
    }
    if (parts.size() <= 3) {
      return UserRoute(service, r, parts[1], parts.size() == 3 ? parts[2] : "");
    }
  }
  return {404, ErrorBody("not_found", "no route for " + r.path)};
}

}  // namespace

json ErrorBody(std::string_view code, std::string_view message, std::string_view detail) {
  return json{{"code", code}, {"message", message}, {"detail", detail}};
}

ApiResponse HandleRequest(Service& service, const ApiRequest& request) {
  try {
    return Route(service, request);
  } catch (const Error& e) {
    return {HttpStatusFor(e.code()), ErrorBody(ErrorCodeName(e.code()), e.what(), e.detail())};
  } catch (const json::exception& e) {
    return {400, ErrorBody(ErrorCodeName(ErrorCode::kInvalidInput),
                           "malformed request field", e.what())};
  } catch (const std::exception& e) {
    return {500, ErrorBody(ErrorCodeName(ErrorCode::kInternal), "internal error", e.what())};
  }
}

void RegisterRoutes(httplib::Server& server, Service& service) {
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, req.body, {}};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    const ApiResponse out = HandleRequest(service, r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  server.Get(any, handler);
  server.Post(any, handler);
  server.Delete(any, handler);
  server.Put(any, handler);
  server.Patch(any, handler);
}

}  // namespace lace
