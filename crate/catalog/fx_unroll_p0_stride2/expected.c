void zero2(double *out, int len)
{
    for (int j = 0; j+4-1 < len; j+=2)
    {
        out[j+0] = 0.0;
        out[j+1] = 0.0;
        out[j+2] = 0.0;
        out[j+3] = 0.0;
    }
}
