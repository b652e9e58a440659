#include "phid/util/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace phid::util {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body)
{
	if (jobs <= 1 || n <= 1) {
		for (std::size_t i = 0; i < n; ++i)
			body(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::exception_ptr error;
	std::mutex error_mutex;
	auto worker = [&] {
		for (;;) {
			const std::size_t i = next.fetch_add(1);
			if (i >= n)
				return;
			try {
				body(i);
			} catch (...) {
				std::lock_guard<std::mutex> lock(error_mutex);
				if (!error)
					error = std::current_exception();
			}
		}
	};
	const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
	std::vector<std::thread> pool;
	for (std::size_t k = 0; k < count; ++k)
		pool.emplace_back(worker);
	for (auto& t : pool)
		t.join();
	if (error)
		std::rethrow_exception(error);
}

} // namespace phid::util
