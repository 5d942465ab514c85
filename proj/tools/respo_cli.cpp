#include <cstdio>

int main() {
    std::puts("respo cli placeholder");
    return 0;
}
