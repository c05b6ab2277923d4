__attribute__((target("avx512")))
void saxpy(float *y, const float *x, float a, int n)
{
    // add and modify avx512-specific code only
    for (int i = 0; i < n; ++i) {
        y[i] = y[i] + a * x[i];
    }
}

__attribute__((target("avx2","avx512")))
int count_pos(const double *x, int n)
{
    // add and modify avx512-specific code only
    int c = 0;
    for (int i = 0; i < n; ++i) {
        if (x[i] > 0.0) {
            c = c + 1;
        }
    }
    return c;
}
