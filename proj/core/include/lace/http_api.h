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

// HTTP JSON API over a Service. Routing is a pure function of the request so
// that it can be exercised without sockets; RegisterRoutes wires it into a
// cpp-httplib server.
//
//   GET    /health
//   GET    /config
//   POST   /users                       {user_id, doc_ids}
//   GET    /users/{id}
//   GET    /users/{id}/profile          ?values=true
//   POST   /users/{id}/edits            {action, ...}
//   POST   /users/{id}/selections       {positive: [], negative: []}
//   DELETE /users/{id}/selections
//   GET    /users/{id}/recommendations  ?k=30&mode=full|rerank&first_stage=path
//   GET    /users/{id}/saves
//   POST   /users/{id}/saves            {doc_id, saved}
//
// Errors carry {code, message, detail}.

#ifndef LACE_HTTP_API_H_
#define LACE_HTTP_API_H_

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "lace/service.h"

namespace httplib {
class Server;
}  // namespace httplib

namespace lace {

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::multimap<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

ApiResponse HandleRequest(Service& service, const ApiRequest& request);

nlohmann::json ErrorBody(std::string_view code, std::string_view message,
                         std::string_view detail = {});

void RegisterRoutes(httplib::Server& server, Service& service);

}  // namespace lace

#endif  // LACE_HTTP_API_H_
