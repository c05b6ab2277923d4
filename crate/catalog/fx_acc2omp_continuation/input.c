void fused(double *a, int n)
{
    #pragma acc kernels \
        copy(a)
    for (int i = 0; i < n; ++i) {
        a[i] = 3.0 * a[i];
    }
}
