void mix4(double *a, double *b, int len)
{
    #pragma omp unroll partial (4)
    for (int j = 0; j < len; ++j)
    {
        a[j+0] = b[j+0];
    }
}
