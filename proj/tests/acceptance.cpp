// placeholder acceptance driver
int main() { return 1; }
