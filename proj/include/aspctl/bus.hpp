#pragma once

// In-process middleware stand-in: named many-to-many topics with bounded
// per-subscriber queues and blocking backpressure. Handlers never run on the
// publisher's stack; each subscription belongs to an executor, and messages
// are delivered when that executor spins.

#include <any>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <typeindex>
#include <utility>
#include <vector>

#include "aspctl/errors.hpp"
#include "aspctl/term.hpp"

namespace aspctl {

// Message carried on the out_rosoclingo / in_rosoclingo topics: an interface
// name plus text-formatted facts. Every fact must parse as a ground atom.
struct InterfaceMsg {
  static constexpr const char* kind_name = "rosoclingo/InterfaceIO";
  std::string interface;
  std::vector<std::string> facts;
};

class Executor;

namespace detail_bus {

struct SubState {
  std::mutex mu;
  std::condition_variable space;
  std::deque<std::any> queue;
  std::function<void(const std::any&)> deliver;
  size_t capacity = 64;
  bool closed = false;
};

}  // namespace detail_bus

// Drains the queues of its subscriptions, invoking handlers on the calling
// thread. One executor per logical consumer.
class Executor {
 public:
  // Delivers everything currently queued. Returns the number of messages
  // handled.
  size_t spin_once() {
    size_t delivered = 0;
    std::vector<std::shared_ptr<detail_bus::SubState>> subs;
    {
      std::lock_guard<std::mutex> lock(mu_);
      subs = subs_;
    }
    for (auto& sub : subs) {
      std::deque<std::any> batch;
      {
        std::lock_guard<std::mutex> lock(sub->mu);
        batch.swap(sub->queue);
      }
      if (!batch.empty()) sub->space.notify_all();
      for (const std::any& msg : batch) {
        sub->deliver(msg);
        ++delivered;
      }
    }
    return delivered;
  }

  size_t pending() const {
    size_t n = 0;
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& sub : subs_) {
      std::lock_guard<std::mutex> inner(sub->mu);
      n += sub->queue.size();
    }
    return n;
  }

 private:
  friend class Bus;
  void adopt(std::shared_ptr<detail_bus::SubState> sub) {
    std::lock_guard<std::mutex> lock(mu_);
    subs_.push_back(std::move(sub));
  }

  mutable std::mutex mu_;
  std::vector<std::shared_ptr<detail_bus::SubState>> subs_;
};

// RAII subscription token; dropping it stops delivery.
class Subscription {
 public:
  Subscription() = default;
  explicit Subscription(std::shared_ptr<detail_bus::SubState> state) : state_(std::move(state)) {}
  Subscription(Subscription&&) = default;
  Subscription& operator=(Subscription&&) = default;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;

  ~Subscription() { reset(); }

  void reset() {
    if (state_) {
      std::lock_guard<std::mutex> lock(state_->mu);
      state_->closed = true;
      state_->space.notify_all();
    }
    state_.reset();
  }

 private:
  std::shared_ptr<detail_bus::SubState> state_;
};

class Bus {
 public:
  explicit Bus(size_t queue_capacity = 64) : capacity_(queue_capacity) {}

  template <class M>
  void advertise(const std::string& topic) {
    std::lock_guard<std::mutex> lock(mu_);
    Topic& t = topics_[topic];
    bind_kind<M>(t, topic);
    t.advertised = true;
  }

  // Blocks while a subscriber queue is full. Requires a prior advertise with
  // the same message kind.
  template <class M>
  void publish(const std::string& topic, const M& msg) {
    std::vector<std::shared_ptr<detail_bus::SubState>> subs;
    std::shared_ptr<std::mutex> order;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = topics_.find(topic);
      if (it == topics_.end() || !it->second.advertised)
        throw ControlError("publish on unadvertised topic '" + topic + "'");
      if (it->second.type != std::type_index(typeid(M)))
        throw ControlError("message kind mismatch on topic '" + topic + "': expected " +
                           it->second.kind);
      subs = it->second.subs;
      order = it->second.publish_mu;
    }
    std::any payload = msg;
    std::lock_guard<std::mutex> serial(*order);
    for (auto& sub : subs) {
      std::unique_lock<std::mutex> lock(sub->mu);
      sub->space.wait(lock, [&] { return sub->closed || sub->queue.size() < sub->capacity; });
      if (sub->closed) continue;
      sub->queue.push_back(payload);
    }
  }

  // Receives every message published on the topic after this call. The
  // handler runs when `executor` spins.
  template <class M>
  [[nodiscard]] Subscription subscribe(const std::string& topic, Executor& executor,
                                       std::function<void(const M&)> handler) {
    auto state = std::make_shared<detail_bus::SubState>();
    state->capacity = capacity_;
    state->deliver = [fn = std::move(handler)](const std::any& msg) {
      fn(std::any_cast<const M&>(msg));
    };
    {
      std::lock_guard<std::mutex> lock(mu_);
      Topic& t = topics_[topic];
      bind_kind<M>(t, topic);
      t.subs.push_back(state);
    }
    executor.adopt(state);
    return Subscription(state);
  }

 private:
  struct Topic {
    bool advertised = false;
    std::type_index type = std::type_index(typeid(void));
    std::string kind;
    std::vector<std::shared_ptr<detail_bus::SubState>> subs;
    // Serializes whole publishes so every subscriber sees one total order.
    std::shared_ptr<std::mutex> publish_mu = std::make_shared<std::mutex>();
  };

  template <class M>
  static const char* kind_of() {
    if constexpr (requires { M::kind_name; })
      return M::kind_name;
    else
      return typeid(M).name();
  }

  template <class M>
  void bind_kind(Topic& t, const std::string& topic) {
    std::type_index ti(typeid(M));
    if (t.type == std::type_index(typeid(void))) {
      t.type = ti;
      t.kind = kind_of<M>();
    } else if (t.type != ti) {
      throw ControlError("message kind mismatch on topic '" + topic + "': expected " + t.kind);
    }
  }

  std::mutex mu_;
  size_t capacity_;
  std::map<std::string, Topic> topics_;
};

}  // namespace aspctl
