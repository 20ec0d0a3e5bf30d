#pragma once

#include <functional>
#include <memory>
#include <string>

namespace distill {

// A completion endpoint. Implementations are stateless per call and safe
// to invoke from multiple threads; failures surface as TransportError
// once any internal retry budget is spent.
class TeacherClient {
 public:
  virtual ~TeacherClient() = default;

  virtual std::string complete(const std::string& prompt,
                               const std::string& request_id) = 0;
};

using TeacherClientFactory =
    std::function<std::shared_ptr<TeacherClient>(const std::string& model_id)>;

}  // namespace distill
