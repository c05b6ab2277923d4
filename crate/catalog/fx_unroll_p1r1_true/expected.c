void scale4(double *out, int len)
{
    #pragma omp unroll partial (4)
    for (int j = 0; j < len; ++j)
    {
        out[j+0] = 0.0;
    }
}
