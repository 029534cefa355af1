#include <cstdio>

int main() {
  std::puts("fraclab: pipelines not wired yet");
  return 0;
}
